#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string output;
};

CmdResult run_cli(const std::string& args) {
    const std::string out_path = "cli_out.txt";
    const std::string cmd = std::string(CERX_BIN) + " " + args + " > " + out_path + " 2>&1";
    const int rc = std::system(cmd.c_str());
    CmdResult res;
    res.exit_code = WEXITSTATUS(rc);
    std::ifstream in(out_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    res.output = buf.str();
    std::remove(out_path.c_str());
    return res;
}

void write_config(const std::string& path, double co = 3300e-6) {
    std::ofstream out(path);
    out << "lf = 5.3e-6\ncf = 76e-9\nco = " << co
        << "\nr = 36\nfs = 200e3\nils_amp = 0.8\nvo_nominal = 24\n";
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_CASE("design command prints the midpoint choice") {
    const auto res = run_cli("design --fs 200e3 --ils-max 0.8 --vo-min 24 --ripple 1 "
                             "--points 2 --out cli_design.csv");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("chosen Y = 0.125") != std::string::npos);
    CHECK(res.output.find("Lf = 4.935") != std::string::npos);
    CHECK(res.output.find("Cf = 7.711") != std::string::npos);
    CHECK(res.output.find("Co_min = 5.562") != std::string::npos);

    const std::string table = slurp("cli_design.csv");
    CHECK(table.substr(0, table.find('\n')) == "Y,Lf,Cf,Co_min");
    // two points plus the header
    CHECK(std::count(table.begin(), table.end(), '\n') == 3);
    std::remove("cli_design.csv");
}

TEST_CASE("design command rejects a zero ripple budget") {
    const auto res = run_cli("design --fs 200e3 --ils-max 0.8 --vo-min 24 --ripple 0");
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("ripple") != std::string::npos);
    std::remove("feasible_region.csv");
}

TEST_CASE("steady command reports the operating point") {
    write_config("cli_steady.cfg");
    const auto res = run_cli("steady --config cli_steady.cfg --D 0.2 --out cli_steady.csv");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("vo_avg") != std::string::npos);
    CHECK(res.output.find("zvs_ok") != std::string::npos);
    CHECK(res.output.find("THD") != std::string::npos);

    const std::string series = slurp("cli_steady.csv");
    CHECK(series.substr(0, series.find('\n')) == "t,vcf,ilf,vo,ils,gate");
    std::remove("cli_steady.cfg");
    std::remove("cli_steady.csv");
}

TEST_CASE("steady command exits 2 on a missing config") {
    const auto res = run_cli("steady --config does_not_exist.cfg --D 0.2");
    CHECK(res.exit_code == 2);
}

TEST_CASE("identical CLI runs produce byte-identical output files") {
    write_config("cli_det.cfg");
    const auto r1 = run_cli("steady --config cli_det.cfg --D 0.1 --out cli_det_a.csv");
    const auto r2 = run_cli("steady --config cli_det.cfg --D 0.1 --out cli_det_b.csv");
    CHECK(r1.exit_code == 0);
    CHECK(r2.exit_code == 0);
    CHECK(slurp("cli_det_a.csv") == slurp("cli_det_b.csv"));
    std::remove("cli_det.cfg");
    std::remove("cli_det_a.csv");
    std::remove("cli_det_b.csv");
}

TEST_CASE("open-loop simulate writes the plain schema") {
    write_config("cli_sim.cfg");
    const auto res = run_cli("simulate --config cli_sim.cfg --scenario open_loop --D 0.2 "
                             "--duration 0.0005 --stride 100 --out cli_sim.csv");
    CHECK(res.exit_code == 0);
    const std::string series = slurp("cli_sim.csv");
    CHECK(series.substr(0, series.find('\n')) == "t,vcf,ilf,vo,ils,gate");
    std::remove("cli_sim.cfg");
    std::remove("cli_sim.csv");
}

TEST_CASE("bode command writes plant and loop tables") {
    write_config("cli_bode.cfg");
    const auto res = run_cli("bode --config cli_bode.cfg --fmin 0.1 --fmax 10e3 --points 50 "
                             "--out cli_bode.csv");
    CHECK(res.exit_code == 0);
    const std::string plant = slurp("cli_bode.csv");
    const std::string loop = slurp("cli_bode_loop.csv");
    CHECK(plant.substr(0, plant.find('\n')) == "f_hz,mag_db,phase_deg");
    CHECK(std::count(plant.begin(), plant.end(), '\n') == 51);
    CHECK(std::count(loop.begin(), loop.end(), '\n') == 51);
    std::remove("cli_bode.cfg");
    std::remove("cli_bode.csv");
    std::remove("cli_bode_loop.csv");
}

TEST_CASE("bode command rejects a bad grid") {
    write_config("cli_badgrid.cfg");
    const auto res = run_cli("bode --config cli_badgrid.cfg --fmin 100 --fmax 10");
    CHECK(res.exit_code == 2);
    std::remove("cli_badgrid.cfg");
}

TEST_CASE("sweep command emits one row per point") {
    write_config("cli_sweep.cfg");
    const auto res =
        run_cli("sweep --config cli_sweep.cfg --param R --from 18 --to 144 --steps 1 "
                "--D 0.25 --out cli_sweep.csv");
    CHECK(res.exit_code == 0);
    const std::string table = slurp("cli_sweep.csv");
    CHECK(table.substr(0, table.find('\n')) == "param,vo_avg,io_avg,zvs_ok,reg_err,ok");
    CHECK(std::count(table.begin(), table.end(), '\n') == 2);
    std::remove("cli_sweep.cfg");
    std::remove("cli_sweep.csv");
}
