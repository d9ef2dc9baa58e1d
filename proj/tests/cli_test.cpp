#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "hpds/cli.hpp"
#include "hpds/io.hpp"
#include "hpds/sysid.hpp"
#include "test_support.hpp"

using namespace hpds;
using hpds::testing::random_almost_symmetric;

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hpds_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("HPDS_TOL");
  }
  void TearDown() override {
    fs::remove_all(dir_);
    unsetenv("HPDS_TOL");
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "hpds");
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }

  void write(const std::string& name, const std::string& text) { io::write_file_atomic(path(name), text); }
  void write_model(const std::string& name, const HpdsModel& m) { write(name, io::dump(io::to_json(m))); }
  io::Json read_json(const std::string& name) { return io::parse(io::read_file(path(name))); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, SimulateIdentifyResimulate) {
  const Tensor a = random_almost_symmetric(3, 3, 1);
  write_model("true.json", HpdsModel(a));
  write("x0.csv", "0.3,-0.2,0.4\n");
  const int steps = static_cast<int>(required_rank(3, 3)) + 5;
  ASSERT_EQ(run({"simulate", "--model", path("true.json"), "--x0", path("x0.csv"), "--tau", "0.05",
                 "--steps", std::to_string(steps), "--out", path("traj.csv")}),
            0)
      << err_.str();
  for (std::string repr : {"full", "tt", "ht"}) {
    ASSERT_EQ(run({"identify", "--data", path("traj.csv"), "--order", "3", "--repr", repr, "--out",
                   path("id.json")}),
              0)
        << err_.str();
    HpdsModel id = io::model_from_json(read_json("id.json"));
    EXPECT_EQ(to_string(id.representation()), repr);
    EXPECT_LE(hpds::testing::rel_error(id.full_tensor(), a), 1e-8);
    ASSERT_EQ(run({"simulate", "--model", path("id.json"), "--x0", path("x0.csv"), "--tau", "0.05",
                   "--steps", std::to_string(steps), "--out", path("re.csv")}),
              0);
    const io::Trajectory t1 = io::parse_trajectory_csv(io::read_file(path("traj.csv")));
    const io::Trajectory t2 = io::parse_trajectory_csv(io::read_file(path("re.csv")));
    EXPECT_LE((t1.x - t2.x).norm(), 1e-8 * t1.x.norm());
  }
}

TEST_F(Cli, IdentifyBelowRequiredRankExitsTwo) {
  write_model("true.json", HpdsModel(random_almost_symmetric(3, 3, 2)));
  write("x0.csv", "0.3\n-0.2\n0.4\n");
  ASSERT_EQ(run({"simulate", "--model", path("true.json"), "--x0", path("x0.csv"), "--tau", "0.05",
                 "--steps", "3", "--out", path("traj.csv")}),
            0);
  EXPECT_EQ(run({"identify", "--data", path("traj.csv"), "--order", "3", "--out", path("id.json")}), 2);
  io::Json j = read_json("id.json");
  EXPECT_EQ(j["status"], "identifiability_failed");
  EXPECT_EQ(j["report"]["required_rank"], 6);
  EXPECT_LE(j["report"]["observed_rank"].get<int>(), 3);
}

TEST_F(Cli, InputOutputIdentification) {
  Rng rng(3);
  const Index n = 3;
  const Matrix c = Eigen::HouseholderQR<Matrix>(rng.normal_matrix(4, 4)).householderQ() *
                   Matrix::Identity(4, n);
  const Tensor a = hpds::testing::conservative_quadratic(n, 4);
  write_model("true.json", HpdsModel(a, Matrix(rng.uniform_matrix(n, 2)), Matrix(c)));
  write("x0.csv", "0.5,0.1,-0.3\n");
  std::string u;
  for (int i = 0; i < 40; ++i) u += io::format_double(rng.uniform(-0.1, 0.1)) + "," + io::format_double(rng.uniform(-0.1, 0.1)) + "\n";
  write("u.csv", "u1,u2\n" + u);
  ASSERT_EQ(run({"simulate", "--model", path("true.json"), "--x0", path("x0.csv"), "--input", path("u.csv"),
                 "--tau", "0.1", "--steps", "40", "--method", "discrete", "--out", path("traj.csv")}),
            0)
      << err_.str();
  ASSERT_EQ(run({"identify", "--data", path("traj.csv"), "--order", "3", "--io", "--out", path("id.json")}), 0)
      << err_.str();
  HpdsModel id = io::model_from_json(read_json("id.json"));
  EXPECT_EQ(id.state_dim(), n);
  EXPECT_EQ(id.input_dim(), 2);
  EXPECT_EQ(id.output_dim(), 4);
}

TEST_F(Cli, AnalyzeControllability) {
  write_model("m.json", HpdsModel(random_almost_symmetric(3, 4, 5)));
  write("B.json", io::dump(io::to_json(Matrix(Matrix::Identity(3, 3)))));
  ASSERT_EQ(run({"analyze", "controllability", "--model", path("m.json"), "--B", path("B.json"), "--out",
                 path("r.json")}),
            0)
      << err_.str();
  io::Json j = read_json("r.json");
  EXPECT_EQ(j["verdict"], "strongly_controllable");
  EXPECT_EQ(j["rank"], 3);
  EXPECT_EQ(j["n"], 3);
  EXPECT_EQ(j["representation"], "full");
  EXPECT_TRUE(j["elapsed_ms"].is_null());
  EXPECT_EQ(run({"analyze", "controllability", "--model", path("m.json"), "--timing", "--B", path("B.json"),
                 "--out", path("t.json")}),
            0);
  EXPECT_TRUE(read_json("t.json")["elapsed_ms"].is_number());
  // No B anywhere is a usage error.
  EXPECT_EQ(run({"analyze", "controllability", "--model", path("m.json"), "--out", path("x.json")}), 1);
}

TEST_F(Cli, AnalyzeObservability) {
  Rng rng(6);
  HpdsModel m(random_almost_symmetric(3, 3, 7), std::nullopt, Matrix(rng.uniform_matrix(1, 3)));
  write_model("m.json", with_representation(m, Representation::kTt));
  ASSERT_EQ(run({"analyze", "observability", "--model", path("m.json"), "--probes", "3", "--seed", "2",
                 "--out", path("r.json")}),
            0)
      << err_.str();
  io::Json j = read_json("r.json");
  EXPECT_EQ(j["verdict"], "locally_weakly_observable");
  EXPECT_EQ(j["representation"], "tt");
  write("x.csv", "0,0,0\n");
  ASSERT_EQ(run({"analyze", "observability", "--model", path("m.json"), "--x", path("x.csv"), "--out",
                 path("z.json")}),
            0);
  EXPECT_EQ(read_json("z.json")["verdict"], "not_observed_at_probes");
  EXPECT_EQ(read_json("z.json")["rank"], 1);
}

TEST_F(Cli, Decompose) {
  const Tensor a = random_almost_symmetric(3, 4, 8);
  write("t.json", io::dump(io::to_json(a)));
  ASSERT_EQ(run({"decompose", "--tensor", path("t.json"), "--method", "tt", "--out", path("tt.json")}), 0);
  ASSERT_EQ(run({"decompose", "--tensor", path("t.json"), "--method", "ht", "--out", path("ht.json")}), 0);
  EXPECT_LE(hpds::testing::rel_error(tt_reconstruct(io::tt_from_json(read_json("tt.json"))), a), 1e-12);
  EXPECT_LE(hpds::testing::rel_error(htd_reconstruct(io::ht_from_json(read_json("ht.json"))), a), 1e-12);
}

TEST_F(Cli, Bench) {
  ASSERT_EQ(run({"bench", "memory", "--n", "2", "--k-list", "5,10", "--scheme", "lowtt", "--out",
                 path("mem.csv")}),
            0)
      << err_.str();
  const std::string mem = io::read_file(path("mem.csv"));
  EXPECT_EQ(mem.substr(0, mem.find('\n')), "scheme,n,k,repr,params,elapsed_ms,rank,seed");
  EXPECT_NE(mem.find("low_tt,2,10,full,1024,,,0"), std::string::npos);
  ASSERT_EQ(run({"bench", "time", "--n", "3", "--k-max", "3", "--m", "1", "--repeats", "1", "--out",
                 path("time.csv")}),
            0)
      << err_.str();
  const std::string time = io::read_file(path("time.csv"));
  EXPECT_EQ(std::count(time.begin(), time.end(), '\n'), 1 + 3 * 2 * 3);
  EXPECT_EQ(run({"bench", "memory", "--n", "10", "--k-list", "8", "--out", path("big.csv")}), 4);
  EXPECT_FALSE(fs::exists(path("big.csv")));
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}), 1);
  EXPECT_EQ(run({"frobnicate"}), 1);
  EXPECT_EQ(run({"decompose", "--method", "tt"}), 1);
  EXPECT_EQ(run({"decompose", "--tensor", path("missing.json"), "--method", "tt", "--out", path("o.json")}), 1);
  EXPECT_EQ(run({"decompose", "--tensor", path("missing.json"), "--method", "cp", "--out", path("o.json")}), 1);
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_NE(out_.str().find("simulate"), std::string::npos);
}

TEST_F(Cli, ToleranceFromEnvironment) {
  write("t.json", io::dump(io::to_json(random_almost_symmetric(3, 3, 9))));
  setenv("HPDS_TOL", "0.5", 1);
  ASSERT_EQ(run({"decompose", "--tensor", path("t.json"), "--method", "tt", "--out", path("loose.json")}), 0);
  unsetenv("HPDS_TOL");
  ASSERT_EQ(run({"decompose", "--tensor", path("t.json"), "--method", "tt", "--out", path("tight.json")}), 0);
  const auto loose = io::tt_from_json(read_json("loose.json")).ranks();
  const auto tight = io::tt_from_json(read_json("tight.json")).ranks();
  EXPECT_LT(loose[1] + loose[2], tight[1] + tight[2]);
  setenv("HPDS_TOL", "abc", 1);
  EXPECT_EQ(run({"decompose", "--tensor", path("t.json"), "--method", "tt", "--out", path("bad.json")}), 1);
}

TEST_F(Cli, DivergenceExitsThree) {
  Tensor a = Tensor::cubical(1, 3);
  a.values()(0) = 1.0;
  write_model("m.json", HpdsModel(a));
  write("x0.csv", "10\n");
  EXPECT_EQ(run({"simulate", "--model", path("m.json"), "--x0", path("x0.csv"), "--tau", "1", "--steps",
                 "100", "--out", path("traj.csv")}),
            3);
  EXPECT_FALSE(fs::exists(path("traj.csv")));
}

TEST_F(Cli, Deterministic) {
  write_model("m.json", HpdsModel(random_almost_symmetric(3, 3, 10)));
  write("x0.csv", "0.1,0.2,0.3\n");
  const std::vector<std::string> sim = {"simulate", "--model", path("m.json"), "--x0", path("x0.csv"),
                                        "--tau", "0.1", "--steps", "12", "--noise-std", "0.01",
                                        "--seed", "4", "--out", path("a.csv")};
  ASSERT_EQ(run(sim), 0);
  const std::string first = io::read_file(path("a.csv"));
  ASSERT_EQ(run(sim), 0);
  EXPECT_EQ(io::read_file(path("a.csv")), first);
}
