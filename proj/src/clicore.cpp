#include "qvolterra/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "qvolterra/fock.hpp"
#include "qvolterra/specfile.hpp"

namespace qvolterra {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Grid {
  double start = 0.0, stop = 0.0, step = 1.0;
  std::vector<double> points() const {
    std::vector<double> pts;
    const int n = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (int k = 0; k < n; ++k) pts.push_back(start + k * step);
    return pts;
  }
};

Grid parse_grid(const std::string& text) {
  Grid g;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &g.start, &g.stop, &g.step, &extra) != 3 ||
      g.step <= 0.0 || g.stop < g.start) {
    throw CLI::ValidationError("grid must be start:stop:step with step > 0 and stop >= start");
  }
  return g;
}

KernelSignature parse_signature(const std::string& text, const std::string& out_sign, int out_port) {
  KernelSignature sig;
  sig.out_port = out_port;
  if (out_sign != "-" && out_sign != "+") {
    throw CLI::ValidationError("--out-sign must be '-' or '+'");
  }
  sig.out_sign = out_sign == "-" ? PortSign::Minus : PortSign::Plus;
  if (text.find(',') == std::string::npos) {
    for (char c : text) {
      if (c == '-') {
        sig.inputs.push_back({0, PortSign::Minus});
      } else if (c == '+') {
        sig.inputs.push_back({0, PortSign::Plus});
      } else {
        throw CLI::ValidationError("signature characters must be '-' or '+'");
      }
    }
  } else {
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      if (tok.size() < 2 || (tok.back() != '-' && tok.back() != '+')) {
        throw CLI::ValidationError("port-qualified signature tokens look like '0-' or '1+'");
      }
      const int port = std::atoi(tok.substr(0, tok.size() - 1).c_str());
      sig.inputs.push_back({port, tok.back() == '-' ? PortSign::Minus : PortSign::Plus});
    }
  }
  if (sig.inputs.empty()) throw CLI::ValidationError("signature must name at least one input");
  return sig;
}

SpecFile load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open spec file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

const ComponentDef& pick_model(const SpecFile& spec, const std::string& model) {
  if (model.empty()) {
    if (spec.components.size() == 1) return spec.components.front();
    throw std::invalid_argument("--model is required when the spec defines several components");
  }
  const ComponentDef* def = spec.find(model);
  if (def == nullptr) throw std::invalid_argument("unknown component '" + model + "'");
  return *def;
}

void emit_component_header(std::ostream& out, const ComponentDef& def) {
  out << "# model = " << def.name << "\n# type = " << def.type << "\n";
  for (const auto& [key, value] : def.params) {
    out << "# " << key << " = " << fmt(value) << "\n";
  }
}

void cartesian_rows(const std::vector<double>& axis, int order,
                    const std::function<void(const std::vector<double>&)>& emit) {
  std::vector<int> idx(order, 0);
  std::vector<double> point(order);
  while (true) {
    for (int k = 0; k < order; ++k) point[k] = axis[idx[k]];
    emit(point);
    int k = order - 1;
    while (k >= 0 && ++idx[k] == static_cast<int>(axis.size())) {
      idx[k] = 0;
      --k;
    }
    if (k < 0) break;
  }
}

DriveSignal make_drive(const std::string& drive_flag, double tmax, double dt) {
  double eps = 0.0, omega_d = 0.0;
  char extra = 0;
  if (std::sscanf(drive_flag.c_str(), "%lf,%lf%c", &eps, &omega_d, &extra) != 2) {
    throw CLI::ValidationError("--drive expects 'eps,omega_d'");
  }
  return DriveSignal::rotating(eps, omega_d, tmax, dt);
}

/// Kernels feeding the driven-port response: out-minus signatures whose
/// inputs all sit on the driven port.
std::vector<ExpSumKernel> driven_kernels(const BilinearSystem& sys, int max_order, int port) {
  std::vector<ExpSumKernel> kernels;
  for (int order = 1; order <= max_order; ++order) {
    for (const auto& sig : nonzero_signatures(sys, order)) {
      if (sig.out_port != port || sig.out_sign != PortSign::Minus) continue;
      bool on_port = true;
      for (const auto& in : sig.inputs) on_port = on_port && in.port == port;
      if (!on_port) continue;
      ExpSumKernel k = symbolic_kernel(sys, sig);
      if (!k.empty()) kernels.push_back(std::move(k));
    }
  }
  return kernels;
}

struct CommonFlags {
  std::string spec_path;
  std::string model;
};

int do_kernel(std::ostream& out, const CommonFlags& common, int order, const std::string& sig_text,
              const std::string& out_sign, int out_port, const std::string& grid_text) {
  const SpecFile spec = load_spec(common.spec_path);
  const ComponentDef& def = pick_model(spec, common.model);
  const KernelSignature sig = parse_signature(sig_text, out_sign, out_port);
  if (sig.order() != order) {
    throw std::invalid_argument("--order does not match the signature length");
  }
  const Grid grid = parse_grid(grid_text);
  const BilinearSystem sys = build_bilinear(component_model(def));
  const ExpSumKernel kernel = symbolic_kernel(sys, sig);

  out << "# command = kernel\n";
  emit_component_header(out, def);
  out << "# order = " << order << "\n# signature = " << sig.to_string() << "\n";
  out << "# tau_grid = " << grid_text << "\n# columns = ";
  for (int k = 1; k <= order; ++k) out << "tau" << k << ",";
  out << "re_k,im_k\n";
  const auto axis = grid.points();
  cartesian_rows(axis, order, [&](const std::vector<double>& taus) {
    const Complex v = kernel.eval(taus);
    for (double tau : taus) out << fmt(tau) << ",";
    out << fmt(v.real()) << "," << fmt(v.imag()) << "\n";
  });
  return 0;
}

int emit_suscept_rows(std::ostream& out, const ComposedSet& set, const KernelSignature& sig,
                      const Grid& grid) {
  const NetSusceptibility* entry = set.find(sig);
  const int order = sig.order();
  const auto axis = grid.points();
  cartesian_rows(axis, order, [&](const std::vector<double>& omegas) {
    const Complex v = entry != nullptr ? entry->eval(omegas) : Complex(0.0, 0.0);
    for (double w : omegas) out << fmt(w) << ",";
    out << fmt(v.real()) << "," << fmt(v.imag()) << "\n";
  });
  return 0;
}

int do_suscept(std::ostream& out, const CommonFlags& common, int order, const std::string& sig_text,
               const std::string& out_sign, int out_port, const std::string& grid_text) {
  const SpecFile spec = load_spec(common.spec_path);
  const ComponentDef& def = pick_model(spec, common.model);
  const KernelSignature sig = parse_signature(sig_text, out_sign, out_port);
  if (sig.order() != order) {
    throw std::invalid_argument("--order does not match the signature length");
  }
  const Grid grid = parse_grid(grid_text);
  const ComposedSet set = component_susceptibilities(def, order);

  out << "# command = suscept\n";
  emit_component_header(out, def);
  out << "# order = " << order << "\n# signature = " << sig.to_string() << "\n";
  out << "# omega_grid = " << grid_text << "\n# columns = ";
  for (int k = 1; k <= order; ++k) out << "omega" << k << ",";
  out << "re_chi,im_chi\n";
  return emit_suscept_rows(out, set, sig, grid);
}

int do_compose(std::ostream& out, const CommonFlags& common, int max_order, int order,
               const std::string& sig_text, const std::string& out_sign, int out_port,
               const std::string& grid_text) {
  const SpecFile spec = load_spec(common.spec_path);
  if (!spec.network.has_value()) {
    throw std::invalid_argument("spec file has no [network] block and no lone component");
  }
  std::map<std::string, ComposedSet> components;
  for (const auto& def : spec.components) {
    components.emplace(def.name, component_susceptibilities(def, max_order));
  }
  const ComposedSet net = evaluate_network(*spec.network, components, max_order);

  out << "# command = compose\n# max_order = " << max_order << "\n";
  out << "# network =";
  for (const auto& name : spec.chain_order) out << " " << name;
  out << "\n";
  for (const auto& [n, entries] : net.orders) {
    out << "# signatures[" << n << "] =";
    for (const auto& [sig, entry] : entries) out << " " << sig.to_string();
    out << "\n";
  }
  if (!sig_text.empty()) {
    const KernelSignature sig = parse_signature(sig_text, out_sign, out_port);
    if (sig.order() != order) {
      throw std::invalid_argument("--order does not match the signature length");
    }
    const Grid grid = parse_grid(grid_text);
    out << "# order = " << order << "\n# signature = " << sig.to_string() << "\n";
    out << "# omega_grid = " << grid_text << "\n# columns = ";
    for (int k = 1; k <= order; ++k) out << "omega" << k << ",";
    out << "re_chi,im_chi\n";
    return emit_suscept_rows(out, net, sig, grid);
  }
  return 0;
}

struct RespondConfig {
  std::string method = "volterra";
  std::string drive_flag;
  double tmax = 10.0;
  double dt = 0.01;
  int max_order = 3;
  int levels = 40;
  bool allow_leak = false;
};

void emit_respond_header(std::ostream& out, const ComponentDef& def, const RespondConfig& cfg,
                         const char* command) {
  out << "# command = " << command << "\n";
  emit_component_header(out, def);
  out << "# method = " << cfg.method << "\n# drive = " << cfg.drive_flag
      << "\n# tmax = " << fmt(cfg.tmax) << "\n# dt = " << fmt(cfg.dt)
      << "\n# max_order = " << cfg.max_order << "\n# levels = " << cfg.levels
      << "\n# allow_leak = " << (cfg.allow_leak ? 1 : 0) << "\n";
}

ResponseResult respond_volterra(const ComponentDef& def, const DriveSignal& drive, int max_order) {
  const BilinearSystem sys = build_bilinear(component_model(def));
  const auto kernels = driven_kernels(sys, max_order, 0);
  return volterra_response(kernels, sys.S(0, 0), drive, max_order);
}

int do_respond(std::ostream& out, const CommonFlags& common, const RespondConfig& cfg) {
  const SpecFile spec = load_spec(common.spec_path);
  const ComponentDef& def = pick_model(spec, common.model);
  const DriveSignal drive = make_drive(cfg.drive_flag, cfg.tmax, cfg.dt);
  emit_respond_header(out, def, cfg, "respond");

  if (cfg.method == "volterra") {
    const ResponseResult r = respond_volterra(def, drive, cfg.max_order);
    out << "# columns = t,re_b_out,im_b_out,x_out";
    for (const auto& [n, contrib] : r.orders) out << ",re_y" << n << ",im_y" << n;
    out << "\n";
    for (std::size_t k = 0; k < r.t.size(); ++k) {
      out << fmt(r.t[k]) << "," << fmt(r.total[k].real()) << "," << fmt(r.total[k].imag()) << ","
          << fmt(r.x_out[k]);
      for (const auto& [n, contrib] : r.orders) {
        out << "," << fmt(contrib[k].real()) << "," << fmt(contrib[k].imag());
      }
      out << "\n";
    }
    return 0;
  }
  std::vector<double> t_grid;
  for (int k = 0; k < drive.size(); ++k) t_grid.push_back(k * cfg.dt);
  if (cfg.method == "oracle") {
    LindbladOptions opts;
    opts.dt = cfg.dt;
    opts.check_leak = !cfg.allow_leak;
    opts.store_states = false;
    const LindbladTrajectory traj =
        lindblad_integrate(component_model(def), drive, cfg.levels, t_grid, opts);
    out << "# columns = t,re_b_out,im_b_out,x_out\n";
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
      out << fmt(traj.t[k]) << "," << fmt(traj.b_out[k].real()) << ","
          << fmt(traj.b_out[k].imag()) << "," << fmt(traj.x_out[k]) << "\n";
    }
    return 0;
  }
  if (cfg.method == "semiclassical") {
    const SemiclassicalTrajectory traj =
        semiclassical_response(component_model(def), drive, t_grid, cfg.dt);
    out << "# columns = t,re_b_out,im_b_out,x_out\n";
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
      out << fmt(traj.t[k]) << "," << fmt(traj.b_out[k].real()) << ","
          << fmt(traj.b_out[k].imag()) << "," << fmt(traj.x_out[k]) << "\n";
    }
    return 0;
  }
  throw std::invalid_argument("--method must be volterra, oracle, or semiclassical");
}

int do_spectrum(std::ostream& out, const CommonFlags& common, const RespondConfig& cfg,
                const std::string& segment) {
  const SpecFile spec = load_spec(common.spec_path);
  const ComponentDef& def = pick_model(spec, common.model);
  const DriveSignal drive = make_drive(cfg.drive_flag, cfg.tmax, cfg.dt);
  int start = 0, count = 0;
  char extra = 0;
  if (std::sscanf(segment.c_str(), "%d:%d%c", &start, &count, &extra) != 2) {
    throw CLI::ValidationError("--segment expects 'start:count' sample indices");
  }
  if (cfg.method != "volterra") {
    throw std::invalid_argument("spectrum currently evaluates the volterra method");
  }
  const ResponseResult r = respond_volterra(def, drive, cfg.max_order);
  const SpectrumResult s = output_spectrum(r, start, count);
  emit_respond_header(out, def, cfg, "spectrum");
  out << "# segment = " << segment << "\n# columns = omega,log10_magnitude\n";
  for (std::size_t k = 0; k < s.omega.size(); ++k) {
    out << fmt(s.omega[k]) << "," << fmt(s.log_magnitude[k]) << "\n";
  }
  return 0;
}

int do_compare(std::ostream& out, const CommonFlags& common, const RespondConfig& cfg,
               int baseline_levels) {
  const SpecFile spec = load_spec(common.spec_path);
  const ComponentDef& def = pick_model(spec, common.model);
  const DriveSignal drive = make_drive(cfg.drive_flag, cfg.tmax, cfg.dt);
  const ModelSpec model = component_model(def);
  std::vector<double> t_grid;
  for (int k = 0; k < drive.size(); ++k) t_grid.push_back(k * cfg.dt);

  const ResponseResult volterra = respond_volterra(def, drive, cfg.max_order);
  LindbladOptions converged_opts;
  converged_opts.dt = cfg.dt;
  converged_opts.check_leak = !cfg.allow_leak;
  converged_opts.store_states = false;
  const LindbladTrajectory oracle =
      lindblad_integrate(model, drive, cfg.levels, t_grid, converged_opts);
  LindbladOptions baseline_opts = converged_opts;
  baseline_opts.check_leak = false;  // the small-truncation baseline leaks by design
  const LindbladTrajectory baseline =
      lindblad_integrate(model, drive, baseline_levels, t_grid, baseline_opts);
  const SemiclassicalTrajectory semicl = semiclassical_response(model, drive, t_grid, cfg.dt);

  emit_respond_header(out, def, cfg, "compare");
  out << "# baseline_levels = " << baseline_levels << "\n";
  out << "# columns = t,x_volterra,x_oracle,x_semiclassical,x_baseline\n";
  double rms_v = 0.0, rms_s = 0.0, rms_b = 0.0;
  const std::size_t n = t_grid.size();
  for (std::size_t k = 0; k < n; ++k) {
    out << fmt(t_grid[k]) << "," << fmt(volterra.x_out[k]) << "," << fmt(oracle.x_out[k]) << ","
        << fmt(semicl.x_out[k]) << "," << fmt(baseline.x_out[k]) << "\n";
    rms_v += std::pow(volterra.x_out[k] - oracle.x_out[k], 2);
    rms_s += std::pow(semicl.x_out[k] - oracle.x_out[k], 2);
    rms_b += std::pow(baseline.x_out[k] - oracle.x_out[k], 2);
  }
  rms_v = std::sqrt(rms_v / n);
  rms_s = std::sqrt(rms_s / n);
  rms_b = std::sqrt(rms_b / n);
  out << "# rms_volterra_vs_oracle = " << fmt(rms_v) << "\n";
  out << "# rms_semiclassical_vs_oracle = " << fmt(rms_s) << "\n";
  out << "# rms_baseline_vs_oracle = " << fmt(rms_b) << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"qvnet — weakly nonlinear quantum network response toolkit"};
  app.require_subcommand(1);

  CommonFlags common;
  int order = 1;
  std::string sig_text = "-";
  std::string out_sign = "-";
  int out_port = 0;
  std::string tau_grid = "0:10:0.1";
  std::string omega_grid = "-5:5:0.05";
  int max_order = 3;
  RespondConfig rcfg;
  std::string segment = "0:64";
  int baseline_levels = 5;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--spec", common.spec_path, "spec file path")->required();
    cmd->add_option("--model", common.model, "component name (default: the lone component)");
  };
  auto add_signature = [&](CLI::App* cmd) {
    cmd->add_option("--order", order, "kernel order n");
    cmd->add_option("--signature", sig_text,
                    "input lines, e.g. '-+-' (port 0) or '0-,1+' (port-qualified)");
    cmd->add_option("--out-sign", out_sign, "output line sign, '-' or '+'");
    cmd->add_option("--out-port", out_port, "output port index");
  };
  auto add_respond = [&](CLI::App* cmd) {
    cmd->add_option("--method", rcfg.method, "volterra | oracle | semiclassical");
    cmd->add_option("--drive", rcfg.drive_flag, "'eps,omega_d' rotating drive")->required();
    cmd->add_option("--tmax", rcfg.tmax, "trajectory end time");
    cmd->add_option("--dt", rcfg.dt, "grid/integrator step");
    cmd->add_option("--max-order", rcfg.max_order, "highest Volterra order");
    cmd->add_option("--levels", rcfg.levels, "oracle truncation level");
    cmd->add_flag("--allow-leak", rcfg.allow_leak, "disable the truncation-leak guard");
  };

  CLI::App* kernel_cmd = app.add_subcommand("kernel", "evaluate a time-domain kernel on a grid");
  add_common(kernel_cmd);
  add_signature(kernel_cmd);
  kernel_cmd->add_option("--tau-grid", tau_grid, "start:stop:step per delay axis");

  CLI::App* suscept_cmd = app.add_subcommand("suscept", "evaluate a susceptibility on a grid");
  add_common(suscept_cmd);
  add_signature(suscept_cmd);
  suscept_cmd->add_option("--omega-grid", omega_grid, "start:stop:step per frequency axis");

  CLI::App* respond_cmd = app.add_subcommand("respond", "output trajectory for a drive");
  add_common(respond_cmd);
  add_respond(respond_cmd);

  CLI::App* spectrum_cmd = app.add_subcommand("spectrum", "windowed output spectrum");
  add_common(spectrum_cmd);
  add_respond(spectrum_cmd);
  spectrum_cmd->add_option("--segment", segment, "'start:count' sample window");

  CLI::App* compose_cmd = app.add_subcommand("compose", "evaluate the network susceptibilities");
  compose_cmd->add_option("--spec", common.spec_path, "spec file path")->required();
  compose_cmd->add_option("--max-order", max_order, "highest composed order");
  compose_cmd->add_option("--order", order, "row output: kernel order");
  std::string compose_sig;
  compose_cmd->add_option("--signature", compose_sig, "row output: input lines");
  compose_cmd->add_option("--out-sign", out_sign, "row output: output sign");
  compose_cmd->add_option("--out-port", out_port, "row output: output port");
  compose_cmd->add_option("--omega-grid", omega_grid, "start:stop:step per frequency axis");

  CLI::App* compare_cmd = app.add_subcommand("compare", "volterra vs oracle vs semiclassical");
  add_common(compare_cmd);
  add_respond(compare_cmd);
  compare_cmd->add_option("--baseline-levels", baseline_levels,
                          "small-truncation baseline level count");

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  std::string prog = "qvnet";
  argv.push_back(prog.data());
  for (auto& a : storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 1;
  }

  try {
    if (kernel_cmd->parsed()) {
      return do_kernel(out, common, order, sig_text, out_sign, out_port, tau_grid);
    }
    if (suscept_cmd->parsed()) {
      return do_suscept(out, common, order, sig_text, out_sign, out_port, omega_grid);
    }
    if (compose_cmd->parsed()) {
      return do_compose(out, common, max_order, order, compose_sig, out_sign, out_port,
                        omega_grid);
    }
    if (respond_cmd->parsed()) {
      return do_respond(out, common, rcfg);
    }
    if (spectrum_cmd->parsed()) {
      return do_spectrum(out, common, rcfg, segment);
    }
    if (compare_cmd->parsed()) {
      return do_compare(out, common, rcfg, baseline_levels);
    }
    err << "no command given\n";
    return 1;
  } catch (const CLI::ValidationError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const SpecParseError& e) {
    err << "spec error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace qvolterra
