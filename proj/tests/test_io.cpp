#include "sparseq/io.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "sparseq/fixtures.hpp"

using sparseq::Dataset;
using sparseq::lambda_from_scaling;
using sparseq::LossKind;
using sparseq::LossModel;
using sparseq::Matrix;
using sparseq::parse_libsvm;
using sparseq::ProblemInstance;
using sparseq::SolveResult;
using sparseq::SolverConfig;
using sparseq::SolverKind;
using sparseq::SparseColumnMatrix;
using sparseq::StepKind;
using sparseq::TraceRecord;
using sparseq::Vector;
using sparseq::write_trace_csv;
using sparseq::write_trace_json;

namespace {

std::string temp_path(const std::string& name) {
  return ::testing::TempDir() + name;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::trunc);
  ASSERT_TRUE(out) << path;
  out << body;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  EXPECT_TRUE(in) << path;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

long parse_error_line(const std::string& path) {
  try {
    parse_libsvm(path);
  } catch (const sparseq::ParseError& e) {
    return e.line();
  }
  return -1;
}

// Shared trace with one pg record (NaN newton columns) and one newton record,
// built from exactly representable doubles so the 17-digit format prints them
// in their shortest form.
SolveResult frozen_result() {
  SolveResult res;
  TraceRecord pg;
  pg.k = 0;
  pg.step = StepKind::pg;
  pg.f = 1.5;
  pg.residual_inf = 0.25;
  pg.support_size = 3;
  pg.mu_bar = 2.0;
  pg.backtracks = 1;
  TraceRecord nt;
  nt.k = 1;
  nt.step = StepKind::newton;
  nt.f = 1.25;
  nt.residual_inf = 0.125;
  nt.support_size = 3;
  nt.mu_bar = 2.0;
  nt.zeta = 0.5;
  nt.alpha = 0.25;
  nt.backtracks = 0;
  nt.cosine = 1.0;
  res.trace = {pg, nt};
  res.x_final = Vector::Zero(4);
  res.x_final[2] = 1.0;
  res.f_final = 1.25;
  res.iterations = 2;
  res.newton_iterations = 1;
  res.status = sparseq::SolveStatus::converged;
  return res;
}

}  // namespace

TEST(ParseLibsvm, ReadsTinyFrozenFile) {
  const std::string path = temp_path("tiny.libsvm");
  write_file(path,
             "# synthetic two-feature sample\n"
             "1 1:0.5 3:-2\n"
             "-1 2:1.25\n"
             "\n"
             "1 3:4\n");
  const Dataset d = parse_libsvm(path);
  EXPECT_EQ(d.A.rows(), 3);
  EXPECT_EQ(d.A.cols(), 3);
  Vector b(3);
  b << 1.0, -1.0, 1.0;
  EXPECT_EQ(d.b, b);
  Matrix expect = Matrix::Zero(3, 3);
  expect(0, 0) = 0.5;
  expect(0, 2) = -2.0;
  expect(1, 1) = 1.25;
  expect(2, 2) = 4.0;
  EXPECT_EQ(d.A.to_dense(), expect);
}

TEST(ParseLibsvm, ReadsTheCommittedFixtures) {
  const std::string dir = SPARSEQ_TEST_DATA_DIR;
  const Dataset ls = parse_libsvm(dir + "/tiny_ls.libsvm");
  EXPECT_EQ(ls.A.rows(), 20);
  EXPECT_EQ(ls.A.cols(), 50);
  const Dataset lg = parse_libsvm(dir + "/tiny_logistic.libsvm");
  EXPECT_EQ(lg.A.rows(), 24);
  EXPECT_EQ(lg.A.cols(), 40);
  for (sparseq::Index i = 0; i < lg.b.size(); ++i)
    EXPECT_TRUE(lg.b[i] == 1.0 || lg.b[i] == -1.0);
  // Both fixtures produce a usable data-driven lambda.
  EXPECT_GT(lambda_from_scaling(ls, LossKind::least_squares, 1e-2), 0.0);
  EXPECT_GT(lambda_from_scaling(lg, LossKind::logistic, 1e-2), 0.0);
}

TEST(ParseLibsvm, WidensToRequestedFeatureCount) {
  const std::string path = temp_path("narrow.libsvm");
  write_file(path, "1 1:1\n-1 2:1\n");
  EXPECT_EQ(parse_libsvm(path).A.cols(), 2);
  EXPECT_EQ(parse_libsvm(path, 10).A.cols(), 10);
  EXPECT_THROW(parse_libsvm(path, 1), sparseq::ParseError);
}

TEST(ParseLibsvm, ReportsTheOffendingLine) {
  const std::string dir = ::testing::TempDir();
  write_file(dir + "bad_index.libsvm", "1 1:1\n1 0:1\n");
  EXPECT_EQ(parse_error_line(dir + "bad_index.libsvm"), 2);
  write_file(dir + "dup.libsvm", "1 2:1 2:3\n");
  EXPECT_EQ(parse_error_line(dir + "dup.libsvm"), 1);
  write_file(dir + "descending.libsvm", "1 1:1\n\n1 3:1 2:1\n");
  EXPECT_EQ(parse_error_line(dir + "descending.libsvm"), 3);
  write_file(dir + "bad_value.libsvm", "1 1:abc\n");
  EXPECT_EQ(parse_error_line(dir + "bad_value.libsvm"), 1);
  write_file(dir + "bad_pair.libsvm", "1 5\n");
  EXPECT_EQ(parse_error_line(dir + "bad_pair.libsvm"), 1);
  write_file(dir + "bad_label.libsvm", "x 1:1\n");
  EXPECT_EQ(parse_error_line(dir + "bad_label.libsvm"), 1);
  write_file(dir + "empty.libsvm", "# nothing\n\n");
  EXPECT_THROW(parse_libsvm(dir + "empty.libsvm"), sparseq::ParseError);
  EXPECT_THROW(parse_libsvm(dir + "does_not_exist.libsvm"), sparseq::IoError);
}

TEST(LambdaScaling, FrozenValues) {
  Matrix a(2, 2);
  a << 1.0, 2.0, 3.0, -4.0;
  Dataset d;
  d.A = SparseColumnMatrix::from_dense(a);
  d.b = Vector::Constant(2, 1.0);
  // A^T b = (4, -2), infinity norm 4; column 1-norms are 4 and 6.
  EXPECT_NEAR(lambda_from_scaling(d, LossKind::least_squares, 0.075), 0.3, 1e-15);
  EXPECT_NEAR(lambda_from_scaling(d, LossKind::logistic, 0.05), 0.3, 1e-15);
}

TEST(LambdaScaling, LeastSquaresScaleIsLinearInTheTargets) {
  Matrix a(2, 2);
  a << 1.0, 2.0, 3.0, -4.0;
  Dataset d;
  d.A = SparseColumnMatrix::from_dense(a);
  d.b = Vector::Constant(2, 1.0);
  Dataset d2 = d;
  d2.b *= 2.0;
  EXPECT_DOUBLE_EQ(lambda_from_scaling(d2, LossKind::least_squares, 0.075),
                   2.0 * lambda_from_scaling(d, LossKind::least_squares, 0.075));
}

TEST(LambdaScaling, RejectsDegenerateAndInvalidInputs) {
  Dataset d;
  d.A = SparseColumnMatrix::identity(2);
  d.b = Vector::Zero(2);
  EXPECT_THROW(lambda_from_scaling(d, LossKind::least_squares, 0.1),
               sparseq::DegenerateScale);
  Dataset empty;
  empty.A = SparseColumnMatrix::from_triplets(2, 2, {});
  empty.b = Vector::Constant(2, 1.0);
  EXPECT_THROW(lambda_from_scaling(empty, LossKind::logistic, 0.1),
               sparseq::DegenerateScale);
  EXPECT_THROW(lambda_from_scaling(d, LossKind::least_squares, 0.0),
               sparseq::InvalidParameter);
  EXPECT_THROW(lambda_from_scaling(d, LossKind::custom, 0.1),
               sparseq::InvalidParameter);
}

TEST(TraceCsv, EmptyTraceWritesHeaderOnly) {
  const std::string path = temp_path("empty_trace.csv");
  write_trace_csv(SolveResult{}, path);
  EXPECT_EQ(read_file(path), std::string(sparseq::kTraceCsvHeader) + "\n");
}

TEST(TraceCsv, FrozenBytes) {
  const std::string path = temp_path("frozen_trace.csv");
  write_trace_csv(frozen_result(), path);
  EXPECT_EQ(read_file(path),
            "k,step,F,residual,support,mu_bar,zeta,alpha,backtracks,cosine,elapsed\n"
            "0,pg,1.5,0.25,3,2,,,1,,0\n"
            "1,newton,1.25,0.125,3,2,0.5,0.25,0,1,0\n");
}

TEST(TraceJson, RoundTripsThroughAParser) {
  const std::string path = temp_path("trace.json");
  write_trace_json(frozen_result(), path);
  const nlohmann::json j = nlohmann::json::parse(read_file(path));
  EXPECT_EQ(j["summary"]["iterations"], 2);
  EXPECT_EQ(j["summary"]["newton_iterations"], 1);
  EXPECT_EQ(j["summary"]["status"], "converged");
  EXPECT_EQ(j["summary"]["nnz"], 1);
  EXPECT_DOUBLE_EQ(j["summary"]["F_final"].get<double>(), 1.25);
  ASSERT_EQ(j["trace"].size(), 2u);
  EXPECT_EQ(j["trace"][0]["step"], "pg");
  EXPECT_TRUE(j["trace"][0]["zeta"].is_null());  // NaN columns become null
  EXPECT_TRUE(j["trace"][0]["cosine"].is_null());
  EXPECT_EQ(j["trace"][1]["step"], "newton");
  EXPECT_DOUBLE_EQ(j["trace"][1]["alpha"].get<double>(), 0.25);
  EXPECT_DOUBLE_EQ(j["trace"][1]["F"].get<double>(), 1.25);
}

TEST(TraceJson, EmptyTraceIsValidJson) {
  const std::string path = temp_path("empty_trace.json");
  write_trace_json(SolveResult{}, path);
  const nlohmann::json j = nlohmann::json::parse(read_file(path));
  EXPECT_TRUE(j["trace"].is_array());
  EXPECT_TRUE(j["trace"].empty());
}

TEST(TraceFiles, RepeatedSolvesProduceByteIdenticalFiles) {
  sparseq::SyntheticSpec spec;
  spec.m = 30;
  spec.n = 60;
  spec.k = 4;
  spec.seed = 9;
  const auto inst = generate_synthetic(spec, LossKind::least_squares);
  const double lam = lambda_from_scaling(inst.data, LossKind::least_squares, 0.05);
  const ProblemInstance prob(inst.data.A, LossModel::least_squares(inst.data.b),
                             lam, 0.5);
  SolverConfig cfg = SolverConfig::defaults(SolverKind::hpgsrn);
  cfg.record_timing = false;  // the elapsed column is the only wall-clock leak

  const std::string p1 = temp_path("run1.csv"), p2 = temp_path("run2.csv");
  const std::string j1 = temp_path("run1.json"), j2 = temp_path("run2.json");
  write_trace_csv(solve(prob, cfg), p1);
  write_trace_json(solve(prob, cfg), j1);
  write_trace_csv(solve(prob, cfg), p2);
  write_trace_json(solve(prob, cfg), j2);
  EXPECT_EQ(read_file(p1), read_file(p2));
  EXPECT_EQ(read_file(j1), read_file(j2));
}

TEST(TraceCsv, ReportsUnwritablePaths) {
  EXPECT_THROW(write_trace_csv(SolveResult{}, "/nonexistent-dir/trace.csv"),
               sparseq::IoError);
  EXPECT_THROW(write_trace_json(SolveResult{}, "/nonexistent-dir/trace.json"),
               sparseq::IoError);
}
