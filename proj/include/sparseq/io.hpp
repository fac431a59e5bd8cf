#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sparseq/driver.hpp"
#include "sparseq/errors.hpp"
#include "sparseq/loss.hpp"
#include "sparseq/sparse_matrix.hpp"

namespace sparseq {

struct Dataset {
  SparseColumnMatrix A;
  Vector b;
};

namespace detail {

inline bool blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

inline double parse_double(const std::string& tok, long line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw ParseError(line_no, "trailing characters in '" + tok + "'");
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError(line_no, "bad number '" + tok + "'");
  }
}

}  // namespace detail

// Reads a LIBSVM-format file: one sample per line, "label idx:val idx:val…"
// with 1-based feature indices in strictly ascending order. Lines that are
// blank or start with '#' are skipped. The feature count is the largest index
// seen unless n_features forces a wider matrix.
inline Dataset parse_libsvm(const std::string& path, Index n_features = 0) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  std::vector<double> labels;
  std::vector<std::tuple<Index, Index, double>> triplets;
  Index max_feature = 0;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::blank_or_comment(line)) continue;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    const Index row = static_cast<Index>(labels.size());
    labels.push_back(detail::parse_double(tok, line_no));
    Index prev_idx = 0;
    while (ls >> tok) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw ParseError(line_no, "expected idx:value, got '" + tok + "'");
      long idx = 0;
      const char* first = tok.data();
      const char* last = tok.data() + colon;
      const auto [end, ec] = std::from_chars(first, last, idx);
      if (ec != std::errc() || end != last)
        throw ParseError(line_no, "bad feature index in '" + tok + "'");
      if (idx < 1) throw ParseError(line_no, "feature indices are 1-based");
      if (idx <= prev_idx)
        throw ParseError(line_no, idx == prev_idx
                                      ? "duplicate feature index " + std::to_string(idx)
                                      : "feature indices must be ascending");
      prev_idx = idx;
      const double val = detail::parse_double(tok.substr(colon + 1), line_no);
      max_feature = std::max<Index>(max_feature, idx);
      triplets.emplace_back(row, static_cast<Index>(idx - 1), val);
    }
  }
  if (labels.empty()) throw ParseError(line_no, "no samples in file");
  const Index n = std::max(n_features, max_feature);
  if (n_features > 0 && max_feature > n_features)
    throw ParseError(line_no, "feature index exceeds the requested width");

  Dataset out;
  out.A = SparseColumnMatrix::from_triplets(static_cast<Index>(labels.size()), n,
                                            std::move(triplets));
  out.b = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
  return out;
}

// Data-driven regularization weight:
//   least squares: lam = c * ||A^T b||_inf
//   logistic:      lam = c * max_j ||A(:, j)||_1
// Throws DegenerateScale when the scale underneath is zero.
inline double lambda_from_scaling(const Dataset& data, LossKind kind, double c) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw InvalidParameter("lambda_from_scaling: c must be positive and finite");
  double scale = 0.0;
  if (kind == LossKind::least_squares) {
    const Vector atb = data.A.multiply_transpose(data.b);
    scale = atb.size() == 0 ? 0.0 : atb.lpNorm<Eigen::Infinity>();
  } else if (kind == LossKind::logistic) {
    for (Index j = 0; j < data.A.cols(); ++j)
      scale = std::max(scale, data.A.column_norm1(j));
  } else {
    throw InvalidParameter("lambda_from_scaling: unsupported loss kind");
  }
  if (scale == 0.0)
    throw DegenerateScale("lambda_from_scaling: data produces a zero scale");
  return c * scale;
}

namespace detail {

// All numeric output goes through this: 17 significant digits round-trip a
// double exactly, and the fixed format keeps traces byte-for-byte stable.
inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_field(double v) {
  return std::isnan(v) ? std::string() : format_g17(v);
}

inline std::string json_number(double v) {
  return std::isnan(v) ? std::string("null") : format_g17(v);
}

}  // namespace detail

inline constexpr const char* kTraceCsvHeader =
    "k,step,F,residual,support,mu_bar,zeta,alpha,backtracks,cosine,elapsed";

inline void write_trace_csv(const SolveResult& res, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << kTraceCsvHeader << "\n";
  for (const TraceRecord& r : res.trace) {
    out << r.k << ',' << to_string(r.step) << ',' << detail::format_g17(r.f)
        << ',' << detail::format_g17(r.residual_inf) << ',' << r.support_size
        << ',' << detail::format_g17(r.mu_bar) << ',' << detail::csv_field(r.zeta)
        << ',' << detail::csv_field(r.alpha) << ',' << r.backtracks << ','
        << detail::csv_field(r.cosine) << ','
        << detail::format_g17(r.elapsed_seconds) << "\n";
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

// JSON layout: {"summary": {...}, "trace": [...]}. Written by hand so every
// double is emitted with the same 17-digit format as the CSV.
inline void write_trace_json(const SolveResult& res, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  const Index nnz = SupportSet::of(res.x_final).size();
  out << "{\n  \"summary\": {\n";
  out << "    \"iterations\": " << res.iterations << ",\n";
  out << "    \"newton_iterations\": " << res.newton_iterations << ",\n";
  out << "    \"status\": \"" << to_string(res.status) << "\",\n";
  out << "    \"F_final\": " << detail::json_number(res.f_final) << ",\n";
  out << "    \"nnz\": " << nnz << ",\n";
  out << "    \"time_seconds\": " << detail::json_number(res.time_seconds) << "\n";
  out << "  },\n  \"trace\": [";
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    const TraceRecord& r = res.trace[i];
    out << (i == 0 ? "\n" : ",\n");
    out << "    {\"k\": " << r.k << ", \"step\": \"" << to_string(r.step)
        << "\", \"F\": " << detail::json_number(r.f)
        << ", \"residual\": " << detail::json_number(r.residual_inf)
        << ", \"support\": " << r.support_size
        << ", \"mu_bar\": " << detail::json_number(r.mu_bar)
        << ", \"zeta\": " << detail::json_number(r.zeta)
        << ", \"alpha\": " << detail::json_number(r.alpha)
        << ", \"backtracks\": " << r.backtracks
        << ", \"cosine\": " << detail::json_number(r.cosine)
        << ", \"elapsed\": " << detail::json_number(r.elapsed_seconds) << "}";
  }
  out << (res.trace.empty() ? "]" : "\n  ]") << "\n}\n";
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace sparseq
