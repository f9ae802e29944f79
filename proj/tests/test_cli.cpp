// End-to-end tests of the qvnet command line, driven in-process through
// run_cli so stdout/stderr and the exit status can be asserted directly.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qvolterra/cli.hpp"

using namespace qvolterra;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

const fs::path& spec_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "qvnet_cli_tests";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_spec(const std::string& name, const std::string& text) {
  const fs::path p = spec_dir() / name;
  std::ofstream f(p);
  f << text;
  return p.string();
}

std::string kerr_spec(double chi = 0.01) {
  std::ostringstream text;
  text << "[component kerr]\n"
          "type = kerr_cavity\n"
          "omega_a = 1.0\n"
          "chi = "
       << chi
       << "\n"
          "gamma = 0.2\n";
  return write_spec(chi == 0.0 ? "kerr0.spec" : "kerr.spec", text.str());
}

std::string chain_spec() {
  return write_spec("chain.spec",
                    "[component cav]\n"
                    "type = linear_cavity\n"
                    "omega = 1.0\n"
                    "gamma = 0.2\n"
                    "\n"
                    "[component amp]\n"
                    "type = amplifier\n"
                    "gain = 2.0\n"
                    "\n"
                    "[component kerr]\n"
                    "type = kerr_cavity\n"
                    "omega_a = 1.0\n"
                    "chi = 0.01\n"
                    "gamma = 0.2\n"
                    "\n"
                    "[network]\n"
                    "chain = cav -> amp -> kerr -> cav\n");
}

/// Numeric (non-comment) CSV rows of a command's stdout.
std::vector<std::vector<double>> data_rows(const std::string& out) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Value of a "# key = value" header line, or "" when absent.
std::string header_value(const std::string& out, const std::string& key) {
  std::istringstream in(out);
  std::string line;
  const std::string prefix = "# " + key + " =";
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) {
      std::string v = line.substr(prefix.size());
      if (!v.empty() && v.front() == ' ') v.erase(0, 1);
      return v;
    }
  }
  return {};
}

std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

}  // namespace

TEST_CASE("kernel command evaluates the first-order decay on a tau grid") {
  const CliResult r = run({"kernel", "--spec", kerr_spec(), "--order", "1", "--signature", "-",
                           "--tau-grid", "0:1:0.5"});
  REQUIRE(r.code == 0);
  CHECK(r.err.empty());
  CHECK(header_value(r.out, "command") == "kernel");
  CHECK(header_value(r.out, "order") == "1");
  CHECK(header_value(r.out, "signature") == "out0-:0-");
  CHECK(header_value(r.out, "columns") == "tau1,re_k,im_k");

  const auto rows = data_rows(r.out);
  REQUIRE(rows.size() == 3);
  const double gamma = 0.2, omega_a = 1.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 3);
    const double tau = 0.5 * static_cast<double>(i);
    const std::complex<double> expect =
        -gamma * std::exp(-(gamma / 2.0 + std::complex<double>(0.0, omega_a)) * tau);
    CHECK(rows[i][0] == doctest::Approx(tau).epsilon(1e-15));
    CHECK(std::abs(rows[i][1] - expect.real()) <= 1e-10);
    CHECK(std::abs(rows[i][2] - expect.imag()) <= 1e-10);
  }
  // tau = 0 is exactly the negated decay rate with no oscillation yet.
  CHECK(rows[0][1] == doctest::Approx(-gamma).epsilon(1e-12));
  CHECK(std::abs(rows[0][2]) <= 1e-12);
}

TEST_CASE("identical invocations produce byte-identical output") {
  const std::vector<std::string> args = {"kernel",      "--spec",  kerr_spec(), "--order", "3",
                                         "--signature", "-+-",     "--tau-grid", "0:2:0.25"};
  const CliResult a = run(args);
  const CliResult b = run(args);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.err == b.err);
  CHECK(data_rows(a.out).size() == 9 * 9 * 9);
}

TEST_CASE("suscept command matches the analytic first-order line") {
  // The lossless driven cavity is all-pass, and exactly -1 on resonance of
  // the conjugate-rotating line.
  const CliResult r = run({"suscept", "--spec", kerr_spec(), "--order", "1", "--signature", "-",
                           "--omega-grid", "-1:-1:1"});
  REQUIRE(r.code == 0);
  CHECK(header_value(r.out, "command") == "suscept");
  CHECK(header_value(r.out, "columns") == "omega1,re_chi,im_chi");
  const auto rows = data_rows(r.out);
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].size() == 3);
  CHECK(rows[0][0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(std::abs(rows[0][1] - (-1.0)) <= 1e-10);
  CHECK(std::abs(rows[0][2]) <= 1e-10);
}

TEST_CASE("compose on a lone component reproduces the suscept rows") {
  const std::string spec = kerr_spec();
  const std::vector<std::string> tail = {"--order",      "1",         "--signature", "-",
                                         "--omega-grid", "-2:2:0.5"};
  std::vector<std::string> sus_args = {"suscept", "--spec", spec};
  sus_args.insert(sus_args.end(), tail.begin(), tail.end());
  std::vector<std::string> comp_args = {"compose", "--spec", spec, "--max-order", "3"};
  comp_args.insert(comp_args.end(), tail.begin(), tail.end());

  const CliResult sus = run(sus_args);
  const CliResult comp = run(comp_args);
  REQUIRE(sus.code == 0);
  REQUIRE(comp.code == 0);

  CHECK(header_value(comp.out, "network") == "kerr");
  const auto sig1 = split_tokens(header_value(comp.out, "signatures[1]"));
  REQUIRE(sig1.size() == 2);
  CHECK(std::find(sig1.begin(), sig1.end(), "out0-:0-") != sig1.end());
  CHECK(std::find(sig1.begin(), sig1.end(), "out0+:0+") != sig1.end());
  CHECK(split_tokens(header_value(comp.out, "signatures[3]")).size() == 6);

  const auto sus_rows = data_rows(sus.out);
  const auto comp_rows = data_rows(comp.out);
  REQUIRE(sus_rows.size() == 9);
  REQUIRE(comp_rows.size() == sus_rows.size());
  for (std::size_t i = 0; i < sus_rows.size(); ++i) {
    REQUIRE(comp_rows[i].size() == 3);
    for (int c = 0; c < 3; ++c) {
      CHECK(std::abs(comp_rows[i][c] - sus_rows[i][c]) <= 1e-12);
    }
  }
}

TEST_CASE("compose reports the chain layout and scales by the amplifier gain") {
  const CliResult r = run({"compose", "--spec", chain_spec(), "--max-order", "3", "--order", "1",
                           "--signature", "-", "--omega-grid", "0:0:1"});
  REQUIRE(r.code == 0);
  CHECK(header_value(r.out, "command") == "compose");
  CHECK(header_value(r.out, "network") == "cav amp kerr cav");
  CHECK(split_tokens(header_value(r.out, "signatures[1]")).size() == 2);
  CHECK(split_tokens(header_value(r.out, "signatures[3]")).size() == 6);

  // Every stage is all-pass except the amplifier, so the chain's first-order
  // magnitude is exactly sqrt(gain) = sqrt(2).
  const auto rows = data_rows(r.out);
  REQUIRE(rows.size() == 1);
  const double mag = std::hypot(rows[0][1], rows[0][2]);
  CHECK(mag == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
}

TEST_CASE("malformed spec files fail with line-numbered diagnostics") {
  struct Case {
    const char* name;
    const char* text;
    const char* needle;  // must appear in stderr
  };
  const Case cases[] = {
      {"bad_type.spec",
       "[component x]\n"
       "type = warp_core\n"
       "gamma = 0.1\n",
       "warp_core"},
      {"missing_param.spec",
       "[component k]\n"
       "type = kerr_cavity\n"
       "omega_a = 1.0\n"
       "chi = 0.01\n",
       "gamma"},
      {"dup_key.spec",
       "[component k]\n"
       "type = kerr_cavity\n"
       "omega_a = 1.0\n"
       "chi = 0.01\n"
       "chi = 0.02\n"
       "gamma = 0.2\n",
       "duplicate key 'chi'"},
      {"unknown_key.spec",
       "[component k]\n"
       "type = kerr_cavity\n"
       "omega_a = 1.0\n"
       "chi = 0.01\n"
       "gamma = 0.2\n"
       "flux = 7\n",
       "unknown key 'flux'"},
      {"dup_name.spec",
       "[component k]\n"
       "type = kerr_cavity\n"
       "omega_a = 1.0\n"
       "chi = 0.01\n"
       "gamma = 0.2\n"
       "[component k]\n"
       "type = amplifier\n"
       "gain = 2.0\n",
       "defined twice"},
      {"undef_chain.spec",
       "[component k]\n"
       "type = kerr_cavity\n"
       "omega_a = 1.0\n"
       "chi = 0.01\n"
       "gamma = 0.2\n"
       "[network]\n"
       "chain = k -> ghost\n",
       "undefined component 'ghost'"},
      {"two_networks.spec",
       "[component k]\n"
       "type = kerr_cavity\n"
       "omega_a = 1.0\n"
       "chi = 0.01\n"
       "gamma = 0.2\n"
       "[network]\n"
       "chain = k\n"
       "[network]\n"
       "chain = k\n",
       "multiple [network] sections"},
      {"unterminated.spec", "[component k\ntype = amplifier\n", "unterminated"},
      {"bad_value.spec",
       "[component k]\n"
       "type = amplifier\n"
       "gain = loud\n",
       "not a finite number"},
  };
  for (const Case& c : cases) {
    CAPTURE(c.name);
    const CliResult r = run({"suscept", "--spec", write_spec(c.name, c.text)});
    CHECK(r.code == 1);
    CHECK(r.err.rfind("spec error: line ", 0) == 0);
    CHECK(r.err.find(c.needle) != std::string::npos);
  }
}

TEST_CASE("usage errors exit with status one and help with zero") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);

  const CliResult help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("kernel") != std::string::npos);
  CHECK(help.out.find("respond") != std::string::npos);
  CHECK(help.out.find("compose") != std::string::npos);

  // required flag missing
  CHECK(run({"kernel"}).code == 1);

  const CliResult nofile = run({"kernel", "--spec", "/nonexistent/void.spec"});
  CHECK(nofile.code == 1);
  CHECK(nofile.err.rfind("usage error:", 0) == 0);
  CHECK(nofile.err.find("cannot open") != std::string::npos);

  const CliResult ambiguous = run({"kernel", "--spec", chain_spec()});
  CHECK(ambiguous.code == 1);
  CHECK(ambiguous.err.find("--model") != std::string::npos);

  const CliResult unknown_model = run({"kernel", "--spec", chain_spec(), "--model", "nope"});
  CHECK(unknown_model.code == 1);
  CHECK(unknown_model.err.find("unknown component 'nope'") != std::string::npos);

  const CliResult mismatch =
      run({"kernel", "--spec", kerr_spec(), "--order", "2", "--signature", "-"});
  CHECK(mismatch.code == 1);
  CHECK(mismatch.err.find("does not match") != std::string::npos);

  const CliResult bad_grid =
      run({"kernel", "--spec", kerr_spec(), "--tau-grid", "5:1:0.5"});
  CHECK(bad_grid.code == 1);
  CHECK(bad_grid.err.rfind("usage error:", 0) == 0);

  const CliResult bad_sign =
      run({"kernel", "--spec", kerr_spec(), "--out-sign", "x"});
  CHECK(bad_sign.code == 1);
  CHECK(bad_sign.err.find("--out-sign") != std::string::npos);

  const CliResult bad_sig_char =
      run({"kernel", "--spec", kerr_spec(), "--signature", "a"});
  CHECK(bad_sig_char.code == 1);

  const CliResult bad_drive =
      run({"respond", "--spec", kerr_spec(), "--drive", "loud"});
  CHECK(bad_drive.code == 1);
  CHECK(bad_drive.err.find("--drive expects") != std::string::npos);

  const CliResult bad_method = run(
      {"respond", "--spec", kerr_spec(), "--drive", "0.1,1.0", "--method", "imagination"});
  CHECK(bad_method.code == 1);
  CHECK(bad_method.err.find("--method") != std::string::npos);
}

TEST_CASE("respond command emits the driven trajectory") {
  const CliResult r = run({"respond", "--spec", kerr_spec(), "--drive", "0.05,0.9", "--tmax",
                           "2", "--dt", "0.01"});
  REQUIRE(r.code == 0);
  CHECK(header_value(r.out, "command") == "respond");
  CHECK(header_value(r.out, "method") == "volterra");

  const std::string columns = header_value(r.out, "columns");
  CHECK(columns.rfind("t,re_b_out,im_b_out,x_out", 0) == 0);
  CHECK(columns.find("re_y1") != std::string::npos);
  CHECK(columns.find("re_y3") != std::string::npos);
  const std::size_t ncols = split_tokens([&] {
                              std::string c = columns;
                              std::replace(c.begin(), c.end(), ',', ' ');
                              return c;
                            }()).size();

  const auto rows = data_rows(r.out);
  REQUIRE(rows.size() == 201);
  for (const auto& row : rows) REQUIRE(row.size() == ncols);

  // At t = 0 nothing has entered the convolution windows yet: the output is
  // the feedthrough of the drive's first sample, and every per-order
  // contribution is still zero.
  CHECK(rows[0][0] == 0.0);
  CHECK(std::abs(rows[0][1] - 0.05) <= 1e-12);
  CHECK(std::abs(rows[0][2]) <= 1e-12);
  CHECK(std::abs(rows[0][3] - std::sqrt(2.0) * 0.05) <= 1e-12);
  for (std::size_t c = 4; c < ncols; ++c) CHECK(std::abs(rows[0][c]) <= 1e-12);
}

TEST_CASE("oracle and semiclassical methods start from the pure feedthrough sample") {
  for (const char* method : {"oracle", "semiclassical"}) {
    CAPTURE(method);
    const CliResult r = run({"respond", "--spec", kerr_spec(), "--method", method, "--drive",
                             "0.05,0.9", "--tmax", "0.5", "--dt", "0.005", "--levels", "12"});
    REQUIRE(r.code == 0);
    CHECK(header_value(r.out, "columns") == "t,re_b_out,im_b_out,x_out");
    const auto rows = data_rows(r.out);
    REQUIRE(rows.size() == 101);
    REQUIRE(rows[0].size() == 4);
    // Vacuum initial state: the reflected output at t = 0 is the bare drive.
    CHECK(rows[0][0] == 0.0);
    CHECK(std::abs(rows[0][1] - 0.05) <= 1e-9);
    CHECK(std::abs(rows[0][2]) <= 1e-9);
    CHECK(std::abs(rows[0][3] - std::sqrt(2.0) * 0.05) <= 1e-9);
  }
}

TEST_CASE("truncation leak aborts with the numerical-failure status") {
  const std::vector<std::string> base = {"respond", "--spec", kerr_spec(),  "--method",
                                         "oracle",  "--drive", "2.0,1.0",   "--tmax",
                                         "3",       "--dt",    "0.01",      "--levels", "3"};
  const CliResult leak = run(base);
  CHECK(leak.code == 2);
  CHECK(leak.err.rfind("numerical failure:", 0) == 0);

  std::vector<std::string> permissive = base;
  permissive.push_back("--allow-leak");
  const CliResult ok = run(permissive);
  REQUIRE(ok.code == 0);
  CHECK(data_rows(ok.out).size() == 301);
}

TEST_CASE("spectrum command windows the output and rejects short segments") {
  const std::vector<std::string> base = {"spectrum", "--spec", kerr_spec(), "--drive",
                                         "0.1,1.3",  "--tmax", "10",        "--dt",
                                         "0.05"};
  std::vector<std::string> ok_args = base;
  ok_args.insert(ok_args.end(), {"--segment", "0:64"});
  const CliResult ok = run(ok_args);
  REQUIRE(ok.code == 0);
  CHECK(header_value(ok.out, "command") == "spectrum");
  CHECK(header_value(ok.out, "segment") == "0:64");
  CHECK(header_value(ok.out, "columns") == "omega,log10_magnitude");
  const auto rows = data_rows(ok.out);
  CHECK(rows.size() >= 16);
  for (const auto& row : rows) {
    REQUIRE(row.size() == 2);
    CHECK(std::isfinite(row[0]));
    CHECK(std::isfinite(row[1]));
  }

  std::vector<std::string> short_args = base;
  short_args.insert(short_args.end(), {"--segment", "0:8"});
  const CliResult too_short = run(short_args);
  CHECK(too_short.code == 2);
  CHECK(too_short.err.rfind("numerical failure:", 0) == 0);

  std::vector<std::string> bad_args = base;
  bad_args.insert(bad_args.end(), {"--segment", "everything"});
  CHECK(run(bad_args).code == 1);

  std::vector<std::string> oracle_args = base;
  oracle_args.insert(oracle_args.end(), {"--method", "oracle"});
  CHECK(run(oracle_args).code == 1);
}

TEST_CASE("compare command reports solver discrepancies at zero nonlinearity") {
  // Resonant drive rung up long enough that a four-level truncation visibly
  // clips the state while fifteen levels stay converged.
  const CliResult r = run({"compare", "--spec", kerr_spec(0.0), "--drive", "0.15,1.0",
                           "--tmax", "20", "--dt", "0.01", "--levels", "15",
                           "--baseline-levels", "4"});
  REQUIRE(r.code == 0);
  CHECK(header_value(r.out, "command") == "compare");
  CHECK(header_value(r.out, "baseline_levels") == "4");
  CHECK(header_value(r.out, "columns") == "t,x_volterra,x_oracle,x_semiclassical,x_baseline");

  const auto rows = data_rows(r.out);
  REQUIRE(rows.size() == 2001);
  for (const auto& row : rows) REQUIRE(row.size() == 5);

  const std::string rv = header_value(r.out, "rms_volterra_vs_oracle");
  const std::string rs = header_value(r.out, "rms_semiclassical_vs_oracle");
  const std::string rb = header_value(r.out, "rms_baseline_vs_oracle");
  REQUIRE(!rv.empty());
  REQUIRE(!rs.empty());
  REQUIRE(!rb.empty());
  const double rms_v = std::stod(rv);
  const double rms_s = std::stod(rs);
  const double rms_b = std::stod(rb);
  // With the nonlinearity off, the kernel pipeline and the semiclassical
  // solver both track the exact solution; the under-truncated baseline does
  // measurably worse.
  CHECK(rms_v <= 1e-7);
  CHECK(rms_s <= 1e-7);
  CHECK(rms_b > 1e-6);
  CHECK(rms_b > 5.0 * rms_v);
  CHECK(rms_b < 0.1);
}
