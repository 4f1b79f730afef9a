// End-to-end checks of the command-line tool: exit codes, produced files,
// and cross-thread-count determinism. The binary path comes from the build
// system via YMHK_CLI_PATH.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "ymhk/io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = YMHK_CLI_PATH;

int run_cmd(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc < 0 ? rc : WEXITSTATUS(rc);
}

fs::path work_dir() {
  const auto d = fs::temp_directory_path() / "ymhk_cli_test";
  fs::create_directories(d);
  return d;
}

fs::path write_config(const char* name, const std::string& text) {
  const auto p = work_dir() / name;
  std::ofstream(p, std::ios::trunc) << text;
  return p;
}

const std::string kTinyCfg =
    "group = u1\n"
    "n = 2\n"
    "extents = 6,6\n"
    "h = 1.0\n"
    "k = 1\n"
    "lambda = 0\n"
    "init = hot:0.5\n"
    "seed = 42\n"
    "t_max = 0.5\n"
    "record_derivatives = true\n";

}  // namespace

TEST_CASE("usage errors exit 2", "[cli]") {
  REQUIRE(run_cmd("") == 2);                  // missing subcommand
  REQUIRE(run_cmd("frobnicate") == 2);        // unknown subcommand
  REQUIRE(run_cmd("run") == 2);               // missing --config
  REQUIRE(run_cmd("run --config /nonexistent.cfg") == 2);
  const auto bad = write_config("bad.cfg", "group = u1\nwat = 1\n");
  REQUIRE(run_cmd("run --config " + bad.string()) == 2);
  REQUIRE(run_cmd("info") == 2);              // nothing to describe
  REQUIRE(run_cmd("--version") == 0);
  REQUIRE(run_cmd("--help") == 0);
}

TEST_CASE("run produces a trace and a loadable final snapshot", "[cli]") {
  const auto cfg = write_config("tiny.cfg", kTinyCfg);
  const auto out = work_dir() / "run_out";
  fs::remove_all(out);
  REQUIRE(run_cmd("run --config " + cfg.string() + " --out " + out.string()) ==
          0);
  REQUIRE(fs::exists(out / "trace.csv"));
  REQUIRE(fs::exists(out / "final.ymhk"));

  const auto rows = ymhk::read_trace_csv((out / "trace.csv").string());
  REQUIRE(rows.size() >= 2);
  REQUIRE(rows.front().step == 0);
  // descent: strictly decreasing energies in the trace
  for (std::size_t i = 1; i < rows.size(); ++i)
    REQUIRE(rows[i].e_total < rows[i - 1].e_total);

  const auto hd = ymhk::read_snapshot_header((out / "final.ymhk").string());
  REQUIRE(hd.group_name == "U(1)");
  REQUIRE(hd.t >= 0.5);

  SECTION("info summarizes both artifacts") {
    REQUIRE(run_cmd("info --snapshot " + (out / "final.ymhk").string()) == 0);
    REQUIRE(run_cmd("info --trace " + (out / "trace.csv").string() +
                    " --q 1") == 0);
  }

  SECTION("resume continues toward a longer horizon") {
    const auto cfg2 = write_config(
        "tiny2.cfg",
        std::string(kTinyCfg).replace(kTinyCfg.find("t_max = 0.5"),
                                      std::string("t_max = 0.5").size(),
                                      "t_max = 1.0"));
    const auto out2 = work_dir() / "resume_out";
    fs::remove_all(out2);
    REQUIRE(run_cmd("resume --config " + cfg2.string() + " --snapshot " +
                    (out / "final.ymhk").string() + " --out " +
                    out2.string()) == 0);
    const auto hd2 =
        ymhk::read_snapshot_header((out2 / "final.ymhk").string());
    REQUIRE(hd2.t >= 1.0);
    REQUIRE(hd2.t > hd.t);
  }

  SECTION("blowup extraction works on the final snapshot") {
    const auto out3 = work_dir() / "blow_out";
    fs::remove_all(out3);
    REQUIRE(run_cmd("blowup --snapshot " + (out / "final.ymhk").string() +
                    " --out " + out3.string()) == 0);
    REQUIRE(fs::exists(out3 / "blowup_unit.ymhk"));
    REQUIRE(fs::exists(out3 / "blowup_report.txt"));
    // extracted snapshots restart the model clock
    const auto hb =
        ymhk::read_snapshot_header((out3 / "blowup_unit.ymhk").string());
    REQUIRE(hb.t == 0.0);
  }
}

TEST_CASE("verify passes on a healthy build", "[cli]") {
  REQUIRE(run_cmd("verify") == 0);
}

TEST_CASE("scale-test judges smooth states against the parabolic law",
          "[cli]") {
  const auto cfg = write_config("wave.cfg",
                                "group = u1\n"
                                "n = 2\n"
                                "extents = 16,16\n"
                                "h = 0.4\n"
                                "k = 1\n"
                                "lambda = 0\n"
                                "init = wave:0.3\n"
                                "t_max = 0.1\n");
  const auto out = work_dir() / "scale_out";
  fs::remove_all(out);
  REQUIRE(run_cmd("scale-test --config " + cfg.string() +
                  " --rho 1,2 --out " + out.string()) == 0);
  REQUIRE(fs::exists(out / "scale_report.txt"));
  // an unreachable tolerance flips the exit code to a test failure
  REQUIRE(run_cmd("scale-test --config " + cfg.string() +
                  " --rho 2 --tol 1e-9 --out " + out.string()) == 1);
}

TEST_CASE("traces and snapshots are identical across thread counts",
          "[cli]") {
  const auto cfg = write_config("det.cfg", kTinyCfg);
  const auto o1 = work_dir() / "det1";
  const auto o4 = work_dir() / "det4";
  fs::remove_all(o1);
  fs::remove_all(o4);
  const auto with_env = [&](const char* env, const fs::path& out) {
    const std::string cmd = std::string(env) + " " + kCli + " run --config " +
                            cfg.string() + " --out " + out.string() +
                            " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };
  REQUIRE(with_env("YMHK_THREADS=1", o1) == 0);
  REQUIRE(with_env("YMHK_THREADS=4", o4) == 0);
  const auto bytes = [](const fs::path& p) {
    return ymhk::detail::read_file(p.string());
  };
  REQUIRE(bytes(o1 / "trace.csv") == bytes(o4 / "trace.csv"));
  REQUIRE(bytes(o1 / "final.ymhk") == bytes(o4 / "final.ymhk"));
}
