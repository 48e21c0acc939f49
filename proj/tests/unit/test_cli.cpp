#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "alvq/commands.hpp"
#include "alvq/dataset.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "alvq");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = alvq::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("alvq_cli_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) { return alvq::read_file(p); }

}  // namespace

TEST_CASE("generate writes a seeded football CSV") {
  TempDir tmp;
  const Run a = cli({"generate", "--dataset", "football", "--n", "200", "--seed", "1", "--out", tmp / "a.csv"});
  REQUIRE(a.status == 0);
  CHECK(a.out.find("samples 200") != std::string::npos);
  cli({"generate", "--dataset", "football", "--n", "200", "--seed", "1", "--out", tmp / "b.csv"});
  CHECK(slurp(tmp / "a.csv") == slurp(tmp / "b.csv"));
  CHECK(slurp(tmp / "a.csv").rfind("x1,x2,x3,label\n", 0) == 0);
  CHECK(alvq::load_csv(tmp / "a.csv").size() == 200);
}

TEST_CASE("train handles missing cells only with angle variants") {
  TempDir tmp;
  alvq::write_file(tmp / "m.csv",
                   "a,b,c,label\n1,2,?,0\n2,1,0.5,0\n-1,-2,-1,1\n-2,?,-1,1\n1,1,1,0\n-1,-1,?,1\n");
  const Run ok = cli({"train", "--data", tmp / "m.csv", "--variant", "ag", "--epochs", "5", "--out", tmp / "m.json"});
  CHECK(ok.status == 0);
  CHECK(fs::exists(tmp / "m.json"));
  CHECK(slurp(tmp / "m.json.trace.csv").rfind("epoch,cost,error\n", 0) == 0);

  const Run bad = cli({"train", "--data", tmp / "m.csv", "--variant", "eg", "--epochs", "5", "--out", tmp / "e.json"});
  CHECK(bad.status == 3);
  CHECK(bad.err.rfind("error[MissingNotSupported]:", 0) == 0);
  CHECK(std::count(bad.err.begin(), bad.err.end(), '\n') == 1);
}

TEST_CASE("a2m rank 3 model shapes") {
  TempDir tmp;
  cli({"generate", "--n", "150", "--out", tmp / "fb.csv"});
  REQUIRE(cli({"train", "--data", tmp / "fb.csv", "--variant", "a2m", "--rank", "3", "--epochs", "3",
               "--out", tmp / "a2m.json"}).status == 0);
  const auto doc = nlohmann::json::parse(slurp(tmp / "a2m.json"));
  CHECK(doc["omega"].size() == 3);
  CHECK(doc["omega"][0].size() == 3);
  CHECK(doc["psi"].size() == 2);
  CHECK(doc["psi"][0].size() == 3);
  CHECK(doc["psi"][0][0].size() == 3);
}

TEST_CASE("usage and config errors exit with status 2") {
  CHECK(cli({}).status == 2);
  CHECK(cli({"frobnicate"}).status == 2);
  const Run r = cli({"train", "--data", "x.csv"});
  CHECK(r.status == 2);
  CHECK(r.err.rfind("error[Usage]:", 0) == 0);
  TempDir tmp;
  cli({"generate", "--n", "50", "--out", tmp / "fb.csv"});
  const Run lr = cli({"train", "--data", tmp / "fb.csv", "--lr", "0.01", "--lr-matrix", "0.1", "--out", tmp / "x.json"});
  CHECK(lr.status == 2);
  CHECK(lr.err.rfind("error[ConfigError]:", 0) == 0);
  CHECK(cli({"train", "--data", tmp / "nope.csv", "--out", tmp / "x.json"}).status == 3);
  CHECK(cli({"--help"}).status == 0);
}

TEST_CASE("crossval, inspect and export-sphere produce deterministic files") {
  TempDir tmp;
  cli({"generate", "--n", "200", "--seed", "4", "--out", tmp / "fb.csv"});
  const std::vector<std::string> cv{"crossval", "--data", tmp / "fb.csv", "--variant", "a2m", "--rank", "3",
                                    "--beta", "1", "--beta", "5", "--folds", "3", "--epochs", "4",
                                    "--no-zscore"};
  auto with_out = [&](const std::string& prefix) {
    auto v = cv;
    v.push_back("--out");
    v.push_back(prefix);
    return v;
  };
  REQUIRE(cli(with_out(tmp / "r1")).status == 0);
  REQUIRE(cli(with_out(tmp / "r2")).status == 0);
  CHECK(slurp(tmp / "r1.json") == slurp(tmp / "r2.json"));
  CHECK(slurp(tmp / "r1.csv") == slurp(tmp / "r2.csv"));
  CHECK(nlohmann::json::parse(slurp(tmp / "r1.json"))["grid"].size() == 2);

  REQUIRE(cli({"train", "--data", tmp / "fb.csv", "--variant", "a2m", "--rank", "3", "--epochs", "4",
               "--out", tmp / "m.json"}).status == 0);
  REQUIRE(cli({"inspect", "--model", tmp / "m.json", "--out-prefix", tmp / "m_"}).status == 0);
  const std::string rel = slurp(tmp / "m_relevances.csv");
  CHECK(rel.rfind("feature,omega,psi[0],psi[1]\nx1,", 0) == 0);
  CHECK(fs::exists(tmp / "m_prototypes.csv"));
  CHECK(fs::exists(tmp / "m_eigen.csv"));

  const std::vector<std::string> sp{"export-sphere", "--model", tmp / "m.json", "--resolution", "10",
                                    "--data", tmp / "fb.csv", "--out"};
  auto s1 = sp, s2 = sp;
  s1.push_back(tmp / "s1.csv");
  s2.push_back(tmp / "s2.csv");
  REQUIRE(cli(s1).status == 0);
  REQUIRE(cli(s2).status == 0);
  CHECK(slurp(tmp / "s1.csv") == slurp(tmp / "s2.csv"));

  REQUIRE(cli({"train", "--data", tmp / "fb.csv", "--variant", "al", "--epochs", "2", "--out", tmp / "l.json"}).status == 0);
  const Run bad = cli({"export-sphere", "--model", tmp / "l.json", "--out", tmp / "s3.csv"});
  CHECK(bad.status == 2);
  CHECK(bad.err.rfind("error[RankUnsupported]:", 0) == 0);
}

TEST_CASE("too many folds for the smallest Cleveland class") {
  TempDir tmp;
  const std::string data = std::string(ALVQ_DATA_DIR) + "/cleveland_binary.data";
  const Run r = cli({"crossval", "--cleveland", data, "--folds", "200", "--epochs", "1", "--out", tmp / "x"});
  CHECK(r.status == 3);
  CHECK(r.err.rfind("error[ClassTooSmall]:", 0) == 0);
  CHECK(r.err.find("class 0") != std::string::npos);
}
