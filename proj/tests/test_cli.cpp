#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "holesim/framestore.hpp"
#include "holesim/holechain.hpp"
#include "holesim/wavefunction.hpp"

using namespace holesim;

namespace {

struct CmdResult {
  int status = -1;
  std::string output;  // stdout and stderr combined
};

CmdResult run_cli(const std::string& args) {
  const std::string capture =
      (std::filesystem::temp_directory_path() / "holesim_cli_capture.txt").string();
  const std::string cmd = std::string(HOLESIM_BIN) + " " + args + " > " + capture + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CmdResult res;
  res.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(capture);
  std::ostringstream os;
  os << in.rdbuf();
  res.output = os.str();
  std::remove(capture.c_str());
  return res;
}

std::string temp_file(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 2") {
    const CmdResult none = run_cli("");
    CHECK(none.status == 2);

    const CmdResult unknown = run_cli("explode");
    CHECK(unknown.status == 2);

    const CmdResult badflag = run_cli("transport --no-such-flag 1");
    CHECK(badflag.status == 2);

    const CmdResult badsym = run_cli("transport --symmetry quantum");
    CHECK(badsym.status == 2);
    CHECK(badsym.output.find("symmetry") != std::string::npos);

    // Validation runs before any compute: a bad grid is rejected instantly.
    const CmdResult badgrid = run_cli("transport --grid-points 150");
    CHECK(badgrid.status == 2);

    const CmdResult onegrid = run_cli("sweep --grid alpha_as=0:1:3");
    CHECK(onegrid.status == 2);

    const CmdResult nogrid = run_cli("diode");
    CHECK(nogrid.status == 2);

    const CmdResult wrongaxis = run_cli("diode --grid t_delay=0:1:2");
    CHECK(wrongaxis.status == 2);
    CHECK(wrongaxis.output.find("alpha_as") != std::string::npos);
  }

  TEST_CASE("help exits cleanly") {
    const CmdResult help = run_cli("--help");
    CHECK(help.status == 0);
    CHECK(help.output.find("transport") != std::string::npos);
    CHECK(help.output.find("chain") != std::string::npos);
  }

  TEST_CASE("config file errors") {
    const CmdResult missing = run_cli("transport --config /no/such/config.json");
    CHECK(missing.status == 2);
    CHECK(missing.output.find("/no/such/config.json") != std::string::npos);

    const std::string bad_key = temp_file("holesim_cli_badkey.json");
    std::ofstream(bad_key) << "{\"frobnicate\": 1}\n";
    const CmdResult unknown = run_cli("transport --config " + bad_key);
    CHECK(unknown.status == 2);
    CHECK(unknown.output.find("frobnicate") != std::string::npos);
    std::remove(bad_key.c_str());

    const std::string not_json = temp_file("holesim_cli_notjson.json");
    std::ofstream(not_json) << "this is not json\n";
    const CmdResult garbage = run_cli("transport --config " + not_json);
    CHECK(garbage.status == 2);
    std::remove(not_json.c_str());
  }

  TEST_CASE("data errors exit with 3") {
    const CmdResult missing = run_cli("bohm --frames /no/such/frames.qhwf");
    CHECK(missing.status == 3);

    const std::string corrupt = temp_file("holesim_cli_corrupt.qhwf");
    std::ofstream(corrupt) << "QXYZ garbage";
    const CmdResult bad = run_cli("bohm --frames " + corrupt);
    CHECK(bad.status == 3);
    std::remove(corrupt.c_str());

    // Unwritable output path on an otherwise fine (cheap) command.
    const CmdResult sink = run_cli("chain --out /no/such/dir/out.csv");
    CHECK(sink.status == 3);
  }

  TEST_CASE("chain subcommand") {
    const CmdResult even = run_cli("chain --sites 4");
    CHECK(even.status == 2);

    const CmdResult even_pulsed =
        run_cli("chain --sites 4 --jpeak 0.2 --width 80 --delay 60 --total 400");
    CHECK(even_pulsed.status == 2);

    const CmdResult partial = run_cli("chain --sites 5 --jpeak 0.2");
    CHECK(partial.status == 2);

    const CmdResult verify =
        run_cli("chain --verify-darkstate --sites 9 --jpeak 0.2 --width 80 --delay 60 --total 400");
    CHECK(verify.status == 0);
    double residual = 1.0;
    REQUIRE(std::sscanf(verify.output.c_str(), "darkstate_residual = %lf", &residual) == 1);
    CHECK(residual <= 1e-12);

    // Default three-site chain must reproduce the in-process reduced model.
    const std::string csv = temp_file("holesim_cli_chain.csv");
    const CmdResult def = run_cli("chain --out " + csv);
    CHECK(def.status == 0);
    double p3 = -1.0;
    REQUIRE(std::sscanf(def.output.c_str(), "p_site3 = %lf", &p3) == 1);

    const TrapSchedule schedule;
    Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(3);
    e1[0] = 1.0;
    const ChainTrace ref = propagate_chain(3, couplings_from_schedule(schedule),
                                           schedule.total_duration(), 0.02, e1);
    CHECK(std::abs(p3 - ref.populations(ref.t.size() - 1, 2)) <= 1e-10);

    const std::string text = slurp(csv);
    CHECK(text.substr(0, text.find('\n')) == "t,p1,p2,p3,dark_overlap");
    std::remove(csv.c_str());
  }

  TEST_CASE("sweep isolates row failures") {
    const std::string csv = temp_file("holesim_cli_sweep.csv");
    const CmdResult res =
        run_cli("sweep --grid frobnicate=0:1:3 --grid alpha_as=0:0:1 --out " + csv);
    CHECK(res.status == 0);  // the table is written; failures live in the rows
    const std::string text = slurp(csv);
    int failed_rows = 0;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
      if (line.find("frobnicate") != std::string::npos && line[0] != '#') ++failed_rows;
    CHECK(failed_rows == 3);
    std::remove(csv.c_str());
  }

  TEST_CASE("transport end to end") {
    const std::string out = temp_file("holesim_cli_transport.json");
    const CmdResult res = run_cli(
        "transport --t-ramp 10 --t-hold 4 --t-delay 4 --t-pre 2 --t-post 2 "
        "--grid-points 160 --dt 0.01 --out " +
        out);
    CHECK(res.status == 0);
    double f = -1.0;
    // stderr (leakage warnings) and stdout share the capture; find the line.
    const std::size_t pos = res.output.find("F_1to3 = ");
    REQUIRE(pos != std::string::npos);
    REQUIRE(std::sscanf(res.output.c_str() + pos, "F_1to3 = %lf", &f) == 1);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);

    const nlohmann::json j = nlohmann::json::parse(slurp(out));
    CHECK(j["F_to_3"].get<double>() == f);
    CHECK(j["initial_site"] == 1);
    CHECK(j["config"]["t_ramp"] == 10.0);
    std::remove(out.c_str());
  }

  TEST_CASE("bohm end to end") {
    Grid2D g;
    g.x_min = -14.0;
    g.x_max = 14.0;
    g.points_per_axis = 144;
    g.dt = 0.01;
    g.frame_stride = 1;
    const Wavefunction2D psi =
        localized_hole_state(1, trap_positions(TrapSchedule{}, 0.0), Symmetry::Bosonic, g);
    const std::string frames = temp_file("holesim_cli_frames.qhwf");
    {
      FrameStoreWriter w(frames, g, psi.symmetry, 0.4);
      for (int k = 0; k < 4; ++k) w.append(psi.amp);
      w.close();
    }

    const CmdResult zero = run_cli("bohm --frames " + frames + " --count 0");
    CHECK(zero.status == 2);

    const std::string traj = temp_file("holesim_cli_traj.csv");
    const std::string stats = temp_file("holesim_cli_stats.json");
    const CmdResult res = run_cli("bohm --frames " + frames + " --count 200 --seed 5 --out " +
                                  traj + " --stats " + stats);
    CHECK(res.status == 0);

    const std::string text = slurp(traj);
    CHECK(text.substr(0, text.find('\n')) == "trajectory_id,t,x1,x2,speed,flag");
    const long rows = std::count(text.begin(), text.end(), '\n');
    CHECK(rows == 1 + 200 * 4);

    const nlohmann::json j = nlohmann::json::parse(slurp(stats));
    CHECK(j["count"] == 200);
    CHECK(j["flags_ok"] == 200);
    CHECK(j["crossers"] == 0);
    CHECK(j["node_terminations"] == 0);
    CHECK(j["tv_distance"].get<double>() <= 0.10);  // 200 samples, coarse cells
    CHECK(j["quality_warning"] == false);

    std::remove(frames.c_str());
    std::remove(traj.c_str());
    std::remove(stats.c_str());
  }
}
