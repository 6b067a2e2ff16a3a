#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "polyelast/cli.hpp"

using polyelast::cli::run;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

int count_prefix(const std::string& text, const std::string& prefix) {
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) n += line.rfind(prefix, 0) == 0;
  return n;
}

}  // namespace

TEST(Cli, MeshCommand) {
  const Result r = call({"mesh", "--family", "cartesian", "--nx", "4", "--ny", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("polymesh2d 1", 0), 0u);
  EXPECT_NE(r.out.find("\ncells 16\n"), std::string::npos);
  EXPECT_NE(r.out.find("# version=polyelast"), std::string::npos);
}

TEST(Cli, MeshIsReproducible) {
  const std::vector<std::string> args{"mesh", "--nx", "6", "--ny", "6", "--twist", "--perturb", "0.2", "--seed", "9"};
  EXPECT_EQ(call(args).out, call(args).out);
  auto other = args;
  other.back() = "10";
  EXPECT_NE(call(args).out, call(other).out);
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(call({"solve", "--method", "fem"}).code, 2);
  EXPECT_EQ(call({"solve", "--nx", "x"}).code, 2);
  EXPECT_EQ(call({"mesh", "--family", "voronoi"}).code, 2);
  EXPECT_EQ(call({"case", "9z"}).code, 2);
  EXPECT_EQ(call({"study", "--case", "1", "--levels", "2"}).code, 2);
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"solve", "--nu", "0.5"}).code, 2);
}

TEST(Cli, SolveWritesOneRowPerMethod) {
  const Result r = call({"solve", "--nx", "4", "--ny", "4", "--method", "all"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_prefix(r.out, "solve,"), 5);
  EXPECT_EQ(count_prefix(r.out, "solve,vem,relax-extra,"), 1);
  EXPECT_NE(r.out.find(",ok\n"), std::string::npos);
}

TEST(Cli, Case6RunsAllMethods) {
  const Result r = call({"case", "6a", "--level", "4", "--method", "all"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_prefix(r.out, "6a,"), 5);
}

TEST(Cli, CaseLadderPrintsRates) {
  const Result r = call({"case", "1", "--levels", "3", "--method", "vem"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_prefix(r.out, "1,vem,"), 3);
  EXPECT_EQ(count_prefix(r.out, "# rate method=vem "), 1);
}

TEST(Cli, StudyRangeSyntax) {
  EXPECT_EQ(polyelast::cli::parse_levels("1..16"), (std::vector<int>{4, 8, 16, 32, 64}));
  EXPECT_EQ(polyelast::cli::parse_levels("3"), (std::vector<int>{4, 8, 16}));
  EXPECT_THROW(polyelast::cli::parse_levels("4..2"), polyelast::ParameterError);
  const Result r = call({"study", "--case", "1", "--method", "mpsa", "--levels", "1..4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_prefix(r.out, "1,mpsa,"), 3);
}

TEST(Cli, ConfigFile) {
  const std::string path = testing::TempDir() + "polyelast_cli.cfg";
  {
    std::ofstream f(path);
    f << "# scripted run\nfamily = triangular\nnx = 3\nny = 3\nmethod = mpsa\n";
  }
  const Result r = call({"solve", "--config", path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("family=triangular nx=3"), std::string::npos);
  {
    std::ofstream f(path);
    f << "colour = blue\n";
  }
  EXPECT_EQ(call({"solve", "--config", path}).code, 2);
  std::remove(path.c_str());
}

TEST(Cli, FileOutputs) {
  const std::string dir = testing::TempDir();
  const std::string csv = dir + "polyelast_case.csv", prefix = dir + "polyelast_case";
  const Result r = call({"case", "4a", "--level", "4", "--param", "2", "--method", "vem", "--out", csv, "--profile",
                         prefix, "--vtk", prefix});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(csv), prof(prefix + "_vem.csv"), vtk(prefix + "_vem.vtk");
  EXPECT_TRUE(in.good());
  EXPECT_TRUE(prof.good());
  EXPECT_TRUE(vtk.good());
  std::string first;
  std::getline(prof, first);
  EXPECT_EQ(first.rfind("# version=", 0), 0u);
  for (const auto& s : {csv, prefix + "_vem.csv", prefix + "_vem.vtk"}) std::remove(s.c_str());
}

TEST(Cli, Version) {
  const Result r = call({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("polyelast"), std::string::npos);
}
