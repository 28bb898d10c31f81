#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mcrcf/mcrcf.hpp"
#include "support.hpp"

using namespace mcrcf;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  CliRun run(const std::string& args) {
    std::string cmd = std::string("'") + MCRCF_CLI_PATH + "' " + args + " > '" + dir.file("stdout") + "' 2> '" +
                      dir.file("stderr") + "'";
    int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(dir.file("stdout"));
    return r;
  }

  std::string write_ml100k(const std::string& name, const RatingsDataset& data) {
    std::ostringstream body;
    for (const auto& r : data.records()) body << r.user_id << '\t' << r.item_id << '\t' << r.rating << "\t0\n";
    return dir.write(name, body.str());
  }

  mcrcf::testing::TempDir dir;
};

}  // namespace

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  auto in = dir.write("u.data", "1\t1\t5\t0\n2\t1\t3\t0\n");
  EXPECT_EQ(run("index --input " + in + " --scale-factor 0 --out " + dir.file("x.idx")).code, 2);
  EXPECT_EQ(run("index --input " + in + " --mode sideways --out " + dir.file("x.idx")).code, 2);
  EXPECT_EQ(run("index --input " + in + " --format csv --out " + dir.file("x.idx")).code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(CliTest, DataErrors) {
  EXPECT_EQ(run("index --input " + dir.file("nope") + " --out " + dir.file("x.idx")).code, 3);
  auto bad = dir.write("bad.data", "1\t1\t5\t0\n1\t2\tseven\t0\n");
  EXPECT_EQ(run("index --input " + bad + " --out " + dir.file("x.idx")).code, 3);
  auto junk = dir.write("junk.idx", "not an index");
  EXPECT_EQ(run("knn --index " + junk + " --query-id 1").code, 3);
}

TEST_F(CliTest, TwoDocumentIndexKnn) {
  auto in = dir.write("u.data", "1\t1\t5\t0\n1\t2\t1\t0\n2\t1\t4\t0\n2\t2\t2\t0\n");
  auto idx = dir.file("two.idx");
  ASSERT_EQ(run("index --input " + in + " --mode user --out " + idx).code, 0);
  auto r = run("knn --index " + idx + " --query-id 1 --k 1");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, 2), "2\t");
  EXPECT_EQ(run("knn --index " + idx + " --query-id 99 --k 1").code, 3);
  EXPECT_EQ(run("knn --index " + idx + " --query-id 1 --similarity cosine").code, 2);
}

TEST_F(CliTest, KnnScoresMatchExhaustiveAcs) {
  auto data = mcrcf::testing::dense_corpus(25, 100, 17);
  auto in = write_ml100k("dense.data", data);
  auto idx = dir.file("dense.idx");
  ASSERT_EQ(run("index --input " + in + " --out " + idx).code, 0);
  auto means = compute_means(data);
  for (Id u : {Id{1}, Id{12}, Id{25}}) {
    auto r = run("knn --index " + idx + " --query-id " + std::to_string(u) + " --k 24 --m 10 --query-norm");
    ASSERT_EQ(r.code, 0);
    auto exact = knn_exhaustive(data, means, u, Mode::user_based, 24);
    std::istringstream lines(r.out);
    for (const auto& nb : exact) {
      Id id = 0;
      double score = 0;
      ASSERT_TRUE(lines >> id >> score);
      EXPECT_EQ(id, nb.neighbor_id);
      EXPECT_NEAR(score, nb.similarity, 1e-8);
    }
    Id extra;
    EXPECT_FALSE(lines >> extra);
  }
}

TEST_F(CliTest, KnnOrderingIsDeterministic) {
  auto data = mcrcf::testing::sparse_corpus(60, 40, 10, 3);
  auto in = write_ml100k("s.data", data);
  auto idx = dir.file("s.idx");
  ASSERT_EQ(run("index --input " + in + " --mode item --out " + idx).code, 0);
  auto index = load_index(idx);
  auto expected = knn_for_document(index, 5, {15, 10}, {ScorerKind::bm25});
  auto r = run("knn --index " + idx + " --query-id 5 --k 15 --similarity bm25");
  ASSERT_EQ(r.code, 0);
  std::istringstream lines(r.out);
  for (const auto& nb : expected) {
    Id id = 0;
    double score = 0;
    ASSERT_TRUE(lines >> id >> score);
    EXPECT_EQ(id, nb.neighbor_id);
    EXPECT_NEAR(score, nb.similarity, 1e-8 * std::max(1.0, std::abs(nb.similarity)));
  }
}

TEST_F(CliTest, PredictFixtureAndColdStart) {
  auto train = dir.write("train.data", "1\t10\t3\t0\n2\t10\t3\t0\n2\t20\t4\t0\n3\t10\t4\t0\n3\t20\t2\t0\n");
  auto nb = dir.write("nb.tsv", "2\t0.8\n3\t-0.4\n");
  auto r = run("predict --train " + train + " --mode user --user 1 --item 20 --neighbors " + nb);
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "value\t3.6667\nrounded\t4\nsource\tfull\nneighbor_count_used\t2\n");

  auto idx = dir.file("p.idx");
  ASSERT_EQ(run("index --input " + train + " --out " + idx).code, 0);
  auto cold = run("predict --index " + idx + " --train " + train + " --user 77 --item 20");
  ASSERT_EQ(cold.code, 0);
  EXPECT_EQ(cold.out, "value\t3.2000\nrounded\t3\nsource\tbase_only\nneighbor_count_used\t0\n");

  auto warm = run("predict --index " + idx + " --train " + train + " --user 1 --item 20 --k 5");
  ASSERT_EQ(warm.code, 0);
  EXPECT_NE(warm.out.find("rounded\t"), std::string::npos);
  EXPECT_EQ(run("predict --train " + train + " --user 1 --item 20").code, 2);
}

TEST_F(CliTest, EvaluateIsByteDeterministic) {
  auto in = write_ml100k("e.data", mcrcf::testing::sparse_corpus(40, 30, 10, 4));
  std::string common = "evaluate --input " + in + " --modes user,item --splits 2";
  std::string args = common + " --similarities tf,acs --k-list 5,10";
  auto a = run(args + " --out " + dir.file("a.csv"));
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(run(args + " --out " + dir.file("b.csv")).code, 0);
  EXPECT_EQ(slurp(dir.file("a.csv")), slurp(dir.file("b.csv")));
  std::ifstream report(dir.file("a.csv"));
  EXPECT_EQ(parse_report(report, ReportFormat::csv).rows.size(), 8u);
  EXPECT_NE(a.out.find("mean_only\tuser_based"), std::string::npos);

  ASSERT_EQ(run(args + " --report-format tsv --out " + dir.file("c.tsv")).code, 0);
  EXPECT_EQ(slurp(dir.file("c.tsv")).substr(0, 13), "mode\tsimilari");
  EXPECT_EQ(run(common + " --k-list 10,5 --out " + dir.file("d.csv")).code, 2);
  EXPECT_EQ(run(common + " --similarities tf,nope --out " + dir.file("d.csv")).code, 2);
  EXPECT_EQ(run(common + " --scale-factor 0 --out " + dir.file("d.csv")).code, 2);
}

TEST_F(CliTest, Inspect) {
  auto in = dir.write("u.data", "1\t1\t5\t0\n1\t2\t1\t0\n2\t1\t4\t0\n2\t2\t2\t0\n");
  auto idx = dir.file("i.idx");
  ASSERT_EQ(run("index --input " + in + " --scale-factor 10 --out " + idx).code, 0);
  auto r = run("inspect --index " + idx + " --doc-id 1");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("mode\tuser_based\n"), std::string::npos);
  EXPECT_NE(r.out.find("scale_factor\t10\n"), std::string::npos);
  EXPECT_NE(r.out.find("documents\t2\n"), std::string::npos);
  EXPECT_NE(r.out.find("p1\t20\n"), std::string::npos);
  EXPECT_NE(r.out.find("n2\t20\n"), std::string::npos);
}
