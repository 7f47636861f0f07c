// debias: command-line front end for the debiasing library.
//
//   debias estimate --data obs.csv --function quadratic:A.csv --method shift
//   debias bench P1 --trials 1000 --out p1.csv
//   debias sweep P1 --axis sigma --values 0.5,1,2
//   debias theory --problem quad1d --xstar 0 --sigma 1 --ck 1
//   debias transport --cost c.csv --uniform
//
// Exit codes: 0 ok, 2 input parse error, 3 configuration error, 4 numeric failure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "debias/all.hpp"

namespace {

using namespace debias;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitConfig = 3;
constexpr int kExitNumeric = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return kExitParse;
    case ErrorKind::numeric:
    case ErrorKind::domain: return kExitNumeric;
    case ErrorKind::contract:
    case ErrorKind::unsupported:
    case ErrorKind::config:
    case ErrorKind::io: return kExitConfig;
  }
  return kExitConfig;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open '" + path + "'");
  return in;
}

double parse_field(const std::string& field, const std::string& path, std::size_t line, std::size_t col) {
  try {
    return parse_double(field);
  } catch (const Error&) {
    throw Error(ErrorKind::parse, path + ": line " + std::to_string(line) + ", column " + std::to_string(col) +
                                      ": not a number: '" + trim(field) + "'");
  }
}

// Numeric CSV rows; '#' and blank lines are skipped.
std::vector<std::vector<double>> read_numeric_rows(const std::string& path) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    std::vector<double> row;
    const auto fields = split(line, ',');
    for (std::size_t c = 0; c < fields.size(); ++c) row.push_back(parse_field(fields[c], path, lineno, c + 1));
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorKind::parse, path + ": line " + std::to_string(lineno) + ": expected " +
                                        std::to_string(rows.front().size()) + " columns, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::parse, path + ": no numeric rows");
  return rows;
}

Matrix read_matrix(const std::string& path) {
  const auto rows = read_numeric_rows(path);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

// A vector stored as one row or one column.
Vector read_vector(const std::string& path) {
  const Matrix m = read_matrix(path);
  if (m.rows() != 1 && m.cols() != 1) throw Error(ErrorKind::parse, path + ": expected a single row or column");
  return Eigen::Map<const Vector>(m.data(), m.size());
}

// Observation file: "# dim=<d> variant=euclidean" then one observation per row.
ObservationSet read_observations(const std::string& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::parse, path + ": empty file");
  std::size_t dim = 0;
  std::string variant;
  {
    std::istringstream hs(trim(line));
    std::string tok;
    hs >> tok;
    if (tok != "#") throw Error(ErrorKind::parse, path + ": line 1: expected '# dim=<d> variant=<euclidean|empirical>'");
    while (hs >> tok) {
      if (tok.rfind("dim=", 0) == 0) {
        const double d = parse_field(tok.substr(4), path, 1, 1);
        if (!(d >= 1) || std::floor(d) != d) throw Error(ErrorKind::parse, path + ": line 1: dim must be a positive integer");
        dim = static_cast<std::size_t>(d);
      } else if (tok.rfind("variant=", 0) == 0) {
        variant = tok.substr(8);
      }
    }
  }
  if (dim == 0) throw Error(ErrorKind::parse, path + ": line 1: missing dim=<d>");
  if (variant == "empirical") throw Error(ErrorKind::unsupported, path + ": empirical observation rows are not supported");
  if (variant != "euclidean") throw Error(ErrorKind::parse, path + ": line 1: unknown variant '" + variant + "'");

  std::vector<Vector> points;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto fields = split(line, ',');
    if (fields.size() != dim)
      throw Error(ErrorKind::parse, path + ": line " + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                                        " values, got " + std::to_string(fields.size()));
    Vector x(static_cast<Eigen::Index>(dim));
    for (std::size_t c = 0; c < dim; ++c) {
      x[static_cast<Eigen::Index>(c)] = parse_field(fields[c], path, lineno, c + 1);
      if (!std::isfinite(x[static_cast<Eigen::Index>(c)]))
        throw Error(ErrorKind::parse, path + ": line " + std::to_string(lineno) + ", column " + std::to_string(c + 1) +
                                          ": value is not finite");
    }
    points.push_back(std::move(x));
  }
  if (points.empty()) throw Error(ErrorKind::parse, path + ": no observations");
  return ObservationSet::from_points(points);
}

Objective build_function(const std::string& spec, std::size_t dim) {
  const auto parts = split(spec, ':');
  const std::string& kind = parts.front();
  auto need = [&](std::size_t n) {
    if (parts.size() != n + 1)
      throw Error(ErrorKind::config, "function '" + kind + "' needs " + std::to_string(n) + " parameter file(s)");
  };
  auto check_dim = [&](Eigen::Index got, const std::string& what) {
    if (static_cast<std::size_t>(got) != dim)
      throw Error(ErrorKind::config, what + " has dimension " + std::to_string(got) + " but the data has dim=" + std::to_string(dim));
  };
  if (kind == "quadratic" || kind == "quartic") {
    need(1);
    const Matrix a = read_matrix(parts[1]);
    if (a.rows() != a.cols()) throw Error(ErrorKind::config, parts[1] + ": matrix must be square");
    check_dim(a.rows(), parts[1]);
    if (!is_spd(a)) throw Error(ErrorKind::config, parts[1] + ": matrix must be symmetric positive definite");
    return kind == "quadratic" ? p1_quadratic(a) : p2_quartic(a);
  }
  if (kind == "rational") {
    need(2);
    const Vector b = read_vector(parts[1]), c = read_vector(parts[2]);
    check_dim(b.size(), parts[1]);
    check_dim(c.size(), parts[2]);
    if (b.minCoeff() <= 0.0 || c.minCoeff() <= 0.0) throw Error(ErrorKind::config, "rational: b and c must be positive");
    return p3_rational(b, c);
  }
  if (kind == "entropy") {
    need(0);
    if (dim < 2) throw Error(ErrorKind::config, "entropy needs dim >= 2");
    return p6_entropy(dim);
  }
  throw Error(ErrorKind::config, "unknown function '" + kind + "' (expected quadratic:A.csv, quartic:A.csv, rational:b.csv:c.csv or entropy)");
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct Flags {
  std::uint64_t seed = 0;
  std::size_t trials = 1000;
  std::size_t k = 0;
  std::size_t n = 0;
  std::string method = "all";
  std::string out;
  std::string svg;
  std::string format = "csv";
  std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  bool no_header = false;
  std::vector<std::string> params;
};

struct Given {
  CLI::Option* k = nullptr;
  CLI::Option* n = nullptr;
};

class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return path_.empty() ? std::cout : file_; }
  void finish() {
    stream().flush();
    if (!stream()) throw Error(ErrorKind::io, "write to '" + (path_.empty() ? std::string("stdout") : path_) + "' failed");
  }

 private:
  std::string path_;
  std::ofstream file_;
};

std::vector<std::string> header_lines(const Flags& f, const std::string& resolved) {
  if (f.no_header) return {};
  return {"config " + resolved, "generated " + utc_timestamp()};
}

void emit_header(std::ostream& os, const std::vector<std::string>& lines) {
  for (const auto& l : lines) os << "# " << l << '\n';
}

ParamMap parse_params(const std::vector<std::string>& items) {
  ParamMap out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::config, "parameter '" + item + "' must be key=value");
    const std::string key = trim(item.substr(0, eq));
    try {
      out[key] = parse_double(item.substr(eq + 1));
    } catch (const Error&) {
      throw Error(ErrorKind::config, "parameter '" + key + "': not a number");
    }
  }
  return out;
}

std::vector<std::string> method_names(const std::string& m) {
  if (m == "all") return {"all"};
  parse_method(m);
  return {m};
}

ExperimentConfig experiment_config(const std::string& problem, const Flags& f, const Given& g) {
  ExperimentConfig cfg;
  cfg.problem = parse_problem_id(problem);
  for (const auto& [k, v] : parse_params(f.params)) {
    if (!is_parameter(cfg.problem, k)) {
      ParamMap scratch;
      apply_param(cfg.problem, scratch, k, v);  // throws with the valid names
    }
    cfg.params[k] = v;
  }
  if (g.n->count() > 0) cfg.n = f.n;
  if (g.k->count() > 0) cfg.k = f.k;
  if (f.trials < 1) throw Error(ErrorKind::config, "--trials must be at least 1");
  if (f.workers < 1) throw Error(ErrorKind::config, "--workers must be at least 1");
  cfg.trials = f.trials;
  cfg.seed = f.seed;
  cfg.methods = method_names(f.method);
  cfg.workers = f.workers;
  return cfg;
}

std::string describe(const ExperimentConfig& cfg, const Flags& f, const std::string& extra) {
  std::ostringstream os;
  os << "problem=" << to_string(cfg.problem);
  ParamMap params = resolved_params(cfg);
  for (const auto& [k, v] : params) os << ' ' << k << '=' << format_double(v);
  os << " n=" << (cfg.n ? std::to_string(*cfg.n) : std::to_string(resolved_n(cfg, params))) << " K=" << resolved_k(cfg)
     << " R=" << cfg.trials << " seed=" << cfg.seed << " method=" << f.method << " workers=" << cfg.workers
     << " format=" << f.format << extra;
  return os.str();
}

std::string svg_path(const Flags& f) {
  if (!f.svg.empty()) return f.svg;
  if (f.out.empty()) return {};
  return std::filesystem::path(f.out).replace_extension(".svg").string();
}

void write_summaries(const std::vector<ExperimentSummary>& summaries, const Flags& f, const std::vector<std::string>& header) {
  const ResultFormat format = parse_result_format(f.format);
  Output out(f.out);
  write_results(out.stream(), summaries, format, header);
  out.finish();
  if (const auto svg = svg_path(f); !svg.empty()) emit_plot(summaries, svg);
}

int cmd_estimate(const Flags& f, const std::string& data, const std::string& function) {
  const ObservationSet set = read_observations(data);
  const Objective obj = build_function(function, set.dimension());
  const bool entropy = function == "entropy";
  std::vector<Method> methods;
  if (f.method == "all") {
    methods.push_back(Method::shift_bootstrap);
    if (obj.sign != SignConstraint::none) methods.push_back(Method::scale_bootstrap);
    if (obj.has_hessian()) methods.push_back(Method::covariance);
  } else {
    methods.push_back(parse_method(f.method));
  }
  const std::size_t k = f.k > 0 ? f.k : 10;
  const BootstrapPlan plan{k, 0, f.seed};
  const auto denom = entropy ? CovarianceDenominator::plug_in : CovarianceDenominator::sample;

  std::vector<DebiasEstimate> estimates;
  for (Method m : methods) {
    switch (m) {
      case Method::shift_bootstrap: estimates.push_back(shift_debias(obj, set, plan)); break;
      case Method::scale_bootstrap: estimates.push_back(scale_debias(obj, set, plan)); break;
      case Method::covariance:
        if (set.size() < 2 && denom == CovarianceDenominator::sample)
          throw Error(ErrorKind::config, "covariance method needs at least 2 observations");
        estimates.push_back(covariance_debias(obj, set, denom));
        break;
    }
  }

  std::ostringstream resolved;
  resolved << "subcommand=estimate data=" << data << " function=" << function << " method=" << f.method << " K=" << k
           << " seed=" << f.seed << " n=" << set.size() << " dim=" << set.dimension() << " format=" << f.format;
  const auto header = header_lines(f, resolved.str());
  const ResultFormat format = parse_result_format(f.format);
  Output out(f.out);
  auto& os = out.stream();
  if (format == ResultFormat::csv) {
    emit_header(os, header);
    os << "function,method,n,K,naive,correction,debiased\n";
    for (const auto& e : estimates)
      os << split(function, ':').front() << ',' << to_string(e.method) << ',' << set.size() << ','
         << (e.method == Method::covariance ? std::string() : std::to_string(k)) << ',' << format_double(e.naive_value)
         << ',' << format_double(e.correction) << ',' << format_double(e.debiased_value) << '\n';
  } else {
    nlohmann::json j{{"header", header}, {"estimates", nlohmann::json::array()}};
    for (const auto& e : estimates)
      j["estimates"].push_back({{"function", split(function, ':').front()},
                                {"method", to_string(e.method)},
                                {"n", set.size()},
                                {"K", e.method == Method::covariance ? nlohmann::json(nullptr) : nlohmann::json(k)},
                                {"naive", e.naive_value},
                                {"correction", e.correction},
                                {"debiased", e.debiased_value}});
    os << j.dump(2) << '\n';
  }
  out.finish();
  return kExitOk;
}

int cmd_bench(const Flags& f, const Given& g, const std::string& problem) {
  const auto cfg = experiment_config(problem, f, g);
  const auto summary = run_bench(cfg);
  write_summaries({summary}, f, header_lines(f, "subcommand=bench " + describe(cfg, f, "")));
  return kExitOk;
}

int cmd_sweep(const Flags& f, const Given& g, const std::string& problem, const std::string& axis,
              const std::string& values) {
  const auto cfg = experiment_config(problem, f, g);
  std::vector<double> vals;
  for (const auto& v : split(values, ',')) {
    try {
      vals.push_back(parse_double(v));
    } catch (const Error&) {
      throw Error(ErrorKind::config, "--values: not a number: '" + trim(v) + "'");
    }
  }
  const auto summaries = run_sweep(cfg, axis, vals);
  write_summaries(summaries, f, header_lines(f, "subcommand=sweep " + describe(cfg, f, " axis=" + axis + " values=" + values)));
  return kExitOk;
}

int cmd_theory(const Flags& f, const std::string& problem, double xstar, double sigma, double ck, std::size_t dim) {
  Objective obj;
  Vector x;
  std::size_t d = 1;
  if (problem == "quad1d") {
    obj.name = "quad1d";
    obj.evaluate = on_coords([](const Vector& v) { return v[0] * v[0]; });
    obj.gradient = [](const Vector& v) -> Vector { return 2.0 * v; };
    obj.hessian = [](const Vector&) -> Matrix { return Matrix::Constant(1, 1, 2.0); };
    obj.third_derivative = [](const Vector&) { return SymmetricTensor3(1); };
    obj.sign = SignConstraint::positive;
    x = Vector::Constant(1, xstar);
  } else {
    const ProblemId id = parse_problem_id(problem);
    if (id != ProblemId::P1 && id != ProblemId::P2 && id != ProblemId::P3 && id != ProblemId::P5)
      throw Error(ErrorKind::config, "theory supports quad1d, P1, P2, P3 and P5");
    ParamMap params = parse_params(f.params);
    if (dim > 0) params["d"] = static_cast<double>(dim);
    const auto inst = generate_instance(id, params, RandomStream(f.seed));
    obj = std::get<Objective>(inst.objective);
    x = coords_of(std::get<Observation>(inst.truth_input));
  }
  d = static_cast<std::size_t>(x.size());
  if (d > kMaxMomentDimension) throw Error(ErrorKind::config, "theory: dimension is capped at 20");
  if (!(sigma > 0.0)) throw Error(ErrorKind::config, "--sigma must be positive");
  if (!(ck > 0.0)) throw Error(ErrorKind::config, "--ck must be positive");
  const auto s = sigma_set(obj, x, moments_gaussian(sigma, d), ck);

  std::ostringstream resolved;
  resolved << "subcommand=theory problem=" << problem << " d=" << d << " sigma=" << format_double(sigma)
           << " ck=" << format_double(ck) << " seed=" << f.seed;
  if (problem == "quad1d") resolved << " xstar=" << format_double(xstar);
  Output out(f.out);
  auto& os = out.stream();
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("undefined"); };
  emit_header(os, header_lines(f, resolved.str()));
  os << "quantity,value\n"
     << "f_star," << format_double(s.f_star) << '\n'
     << "sigma1," << format_double(s.sigma1) << '\n'
     << "sigma2," << format_double(s.sigma2) << '\n'
     << "sigma3," << format_double(s.sigma3) << '\n'
     << "sigma4," << format_double(s.sigma4) << '\n'
     << "sigma4_prime," << opt(s.sigma4_prime) << '\n'
     << "margin_shift," << format_double(s.margin_shift) << '\n'
     << "margin_shift_alt," << format_double(s.margin_shift_alt) << '\n'
     << "margin_scale," << opt(s.margin_scale) << '\n'
     << "margin_scale_alt," << opt(s.margin_scale_alt) << '\n';
  out.finish();
  return kExitOk;
}

int cmd_transport(const Flags& f, const std::string& cost_path, bool uniform, const std::string& supply_path,
                  const std::string& demand_path) {
  Matrix cost = read_matrix(cost_path);
  TransportProblem problem;
  if (uniform) {
    if (!supply_path.empty() || !demand_path.empty())
      throw Error(ErrorKind::config, "--uniform cannot be combined with --supply/--demand");
    problem = TransportProblem::uniform(cost);
  } else {
    if (supply_path.empty() || demand_path.empty())
      throw Error(ErrorKind::config, "transport needs --uniform or both --supply and --demand");
    const Vector s = read_vector(supply_path), d = read_vector(demand_path);
    problem = {cost, std::vector<double>(s.data(), s.data() + s.size()), std::vector<double>(d.data(), d.data() + d.size())};
  }
  try {
    problem.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::config, e.what());
  }
  const auto plan = solve_transport(problem);
  Output out(f.out);
  auto& os = out.stream();
  emit_header(os, header_lines(f, "subcommand=transport cost=" + cost_path + (uniform ? " uniform" : " supply=" + supply_path + " demand=" + demand_path)));
  os << "value," << format_double(plan.value) << '\n';
  os << "dual_value," << format_double(dual_value(problem, plan)) << '\n';
  os << "pivots," << plan.pivots << '\n';
  os << "# coupling\n";
  for (Eigen::Index i = 0; i < plan.coupling.rows(); ++i) {
    for (Eigen::Index j = 0; j < plan.coupling.cols(); ++j) os << (j ? "," : "") << format_double(plan.coupling(i, j));
    os << '\n';
  }
  os << "# row potentials\n";
  for (Eigen::Index i = 0; i < plan.row_potential.size(); ++i) os << (i ? "," : "") << format_double(plan.row_potential[i]);
  os << "\n# column potentials\n";
  for (Eigen::Index j = 0; j < plan.col_potential.size(); ++j) os << (j ? "," : "") << format_double(plan.col_potential[j]);
  os << '\n';
  out.finish();
  return kExitOk;
}

// Splices key=value lines from --config FILE into argv right after the
// subcommand, so flags typed on the command line (parsed later) win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw Error(ErrorKind::config, "--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot open config file '" + path + "'");
  std::vector<std::string> injected;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::config, path + ": line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "no-header") {
      if (value == "true" || value == "1") injected.push_back("--no-header");
      continue;
    }
    injected.push_back("--" + key + "=" + value);
  }
  const auto sub = std::find_if(rest.begin(), rest.end(), [](const std::string& a) { return !a.empty() && a.front() != '-'; });
  if (sub == rest.end()) return rest;
  rest.insert(sub + 1, injected.begin(), injected.end());
  return rest;
}

void add_common(CLI::App* cmd, Flags& f, Given& g, bool experiment) {
  cmd->add_option("--seed", f.seed, "Master seed")->envname("DEBIAS_SEED");
  cmd->add_option("--out", f.out, "Output path (default: stdout)");
  cmd->add_option("--format", f.format, "csv or json");
  cmd->add_flag("--no-header", f.no_header, "Omit the config and timestamp header lines");
  cmd->add_option("--param,-p", f.params, "Family parameter override key=value (repeatable)")->allow_extra_args(false);
  g.k = cmd->add_option("--k", f.k, "Bootstrap rounds K");
  g.n = cmd->add_option("--n", f.n, "Observations per trial");
  cmd->add_option("--method", f.method, "shift, scale, cov or all");
  if (experiment) {
    cmd->add_option("--trials", f.trials, "Trials R");
    cmd->add_option("--workers", f.workers, "Worker threads");
    cmd->add_option("--svg", f.svg, "SVG plot path (default: --out with .svg)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plug-in estimator debiasing: estimate, bench, sweep, theory, transport"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.add_option("--config", "key=value file; command-line flags override it");

  Flags f;
  Given g_est, g_bench, g_sweep, g_theory, g_transport;

  auto* est = app.add_subcommand("estimate", "Debias F(x̄) for a data file");
  std::string data, function;
  add_common(est, f, g_est, false);
  est->add_option("--data", data, "Observation file")->required();
  est->add_option("--function", function, "quadratic:A.csv | quartic:A.csv | rational:b.csv:c.csv | entropy")->required();

  auto* bench = app.add_subcommand("bench", "Run one problem family preset");
  std::string bench_problem;
  add_common(bench, f, g_bench, true);
  bench->add_option("problem", bench_problem, "P1..P7")->required();

  auto* sweep = app.add_subcommand("sweep", "Sweep one axis of a problem family");
  std::string sweep_problem, axis, values;
  add_common(sweep, f, g_sweep, true);
  sweep->add_option("problem", sweep_problem, "P1..P7")->required();
  sweep->add_option("--axis", axis, "Family parameter, n or K")->required();
  sweep->add_option("--values", values, "Comma-separated axis values")->required();

  auto* theory = app.add_subcommand("theory", "Sigma quantities and improvement margins");
  std::string theory_problem = "quad1d";
  double xstar = 0.0, sigma = 1.0, ck = 1.0;
  std::size_t dim = 0;
  add_common(theory, f, g_theory, false);
  theory->add_option("--problem", theory_problem, "quad1d, P1, P2, P3 or P5");
  theory->add_option("--xstar", xstar, "x* for quad1d");
  theory->add_option("--sigma", sigma, "Gaussian noise level");
  theory->add_option("--ck", ck, "C_K (K/n)");
  theory->add_option("--d", dim, "Dimension for generated families");

  auto* transport = app.add_subcommand("transport", "Exact discrete optimal transport");
  std::string cost, supply, demand;
  bool uniform = false;
  add_common(transport, f, g_transport, false);
  transport->add_option("--cost", cost, "Cost matrix CSV")->required();
  transport->add_flag("--uniform", uniform, "Uniform supply and demand");
  transport->add_option("--supply", supply, "Supply weights CSV");
  transport->add_option("--demand", demand, "Demand weights CSV");

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  }

  try {
    if (*est) return cmd_estimate(f, data, function);
    if (*bench) return cmd_bench(f, g_bench, bench_problem);
    if (*sweep) return cmd_sweep(f, g_sweep, sweep_problem, axis, values);
    if (*theory) return cmd_theory(f, theory_problem, xstar, sigma, ck, dim);
    if (*transport) return cmd_transport(f, cost, uniform, supply, demand);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitConfig;
}
