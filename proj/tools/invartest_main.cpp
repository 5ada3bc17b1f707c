// Command-line front end: statistic computation from CSV data, the verifier
// suites, Monte Carlo power tables and geometry probes.
//
// Exit codes: 0 success, 2 usage/parse error, 3 data error,
// 4 verification failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "invartest/cone_probe.hpp"
#include "invartest/distributions.hpp"
#include "invartest/invariant_tests.hpp"
#include "invartest/power_lab.hpp"
#include "invartest/rng.hpp"
#include "invartest/verifiers.hpp"

namespace {

using namespace invartest;

constexpr const char* kToolVersion = "0.1.0";
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitVerification = 4;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt6(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Locale-independent double parse (accepts scientific notation).
std::optional<double> parse_double(std::string_view field) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
    field.remove_prefix(1);
  }
  while (!field.empty() &&
         (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  if (field.empty()) return std::nullopt;
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

// CSV of n rows x p numeric columns; a non-numeric first row is treated as a
// header and skipped.
Matrix read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split(line, ',');
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (const std::string& f : fields) {
      // Accept nan/inf spellings so non-finite data reaches the library's
      // NON_FINITE check instead of dying as a parse error.
      std::string trimmed;
      for (char ch : f) {
        if (ch != ' ' && ch != '\t' && ch != '\r') trimmed.push_back(ch);
      }
      if (trimmed == "nan" || trimmed == "NaN") {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      if (trimmed == "inf" || trimmed == "-inf") {
        row.push_back(trimmed[0] == '-'
                          ? -std::numeric_limits<double>::infinity()
                          : std::numeric_limits<double>::infinity());
        continue;
      }
      const auto value = parse_double(f);
      if (!value) {
        numeric = false;
        break;
      }
      row.push_back(*value);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header row
      }
      throw std::runtime_error("non-numeric field outside header row");
    }
    first = false;
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw std::runtime_error("ragged CSV row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty() || width == 0) {
    throw std::runtime_error("no data rows in " + path);
  }
  Matrix data(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j)
      data(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return data;
}

int map_data_error(const Error& err) {
  switch (err.code()) {
    case Errc::TooFewRows:
    case Errc::NonFinite:
    case Errc::SingularScatter:
    case Errc::NonPd:
      return kExitData;
    default:
      return kExitUsage;
  }
}

// ---- stats ----------------------------------------------------------------

int run_stats(const std::string& path, Index p1, bool as_json, bool as_tsv) {
  Matrix data;
  try {
    data = read_csv(path);
  } catch (const std::exception& ex) {
    std::cerr << "error: parse: " << ex.what() << "\n";
    return kExitUsage;
  }
  try {
    const SufficientStats stats = sufficient_stats(data, p1);
    const TestStatistics ts = compute_statistics(stats);
    const Index p = data.cols();
    if (as_json) {
      std::string xbar = "[";
      for (Index i = 0; i < stats.xbar.size(); ++i) {
        if (i) xbar += ",";
        xbar += fmt17(stats.xbar[i]);
      }
      xbar += "]";
      std::cout << "{\"n\":" << stats.n << ",\"p\":" << p << ",\"p1\":" << p1
                << ",\"xbar\":" << xbar << ",\"t2\":" << fmt17(ts.t2)
                << ",\"u\":" << fmt17(ts.u) << ",\"w\":" << fmt17(ts.w)
                << ",\"m\":" << fmt17(ts.m) << "}\n";
    } else if (as_tsv) {
      std::string xbar;
      for (Index i = 0; i < stats.xbar.size(); ++i) {
        if (i) xbar += ",";
        xbar += fmt17(stats.xbar[i]);
      }
      std::cout << "n\tp\tp1\tt2\tu\tw\tm\txbar\n";
      std::cout << stats.n << "\t" << p << "\t" << p1 << "\t" << fmt17(ts.t2)
                << "\t" << fmt17(ts.u) << "\t" << fmt17(ts.w) << "\t"
                << fmt17(ts.m) << "\t" << xbar << "\n";
    } else {
      std::cout << "n\t" << stats.n << "\n";
      std::cout << "p\t" << p << "\n";
      std::cout << "p1\t" << p1 << "\n";
      std::cout << "xbar\t";
      for (Index i = 0; i < stats.xbar.size(); ++i) {
        if (i) std::cout << ", ";
        std::cout << fmt6(stats.xbar[i]);
      }
      std::cout << "\n";
      std::cout << "T2\t" << fmt6(ts.t2) << "\n";
      std::cout << "U\t" << fmt6(ts.u) << "\n";
      std::cout << "W\t" << fmt6(ts.w) << "\n";
      std::cout << "M\t" << fmt6(ts.m) << "\n";
    }
    return 0;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return map_data_error(err);
  }
}

// ---- verify ---------------------------------------------------------------

int run_verify(const std::string& lemma, const VerifierConfig& cfg) {
  std::vector<LemmaId> ids;
  if (lemma == "all") {
    ids = {LemmaId::L1BplusConvex, LemmaId::L2Penrose, LemmaId::L4BConcave,
           LemmaId::L6QuadConvex,  LemmaId::Eq28Chain, LemmaId::Eq29Chain,
           LemmaId::Thm1AuConvex,  LemmaId::T2RegionConvex,
           LemmaId::WRegionNonconvex};
  } else {
    const auto id = parse_lemma_id(lemma);
    if (!id) {
      std::cerr << "error: unknown verifier id '" << lemma << "'\n";
      return kExitUsage;
    }
    ids.push_back(*id);
  }
  try {
    validate(cfg);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  }
  bool any_fail = false;
  for (LemmaId id : ids) {
    const VerifierReport rep = run_verifier(id, cfg);
    std::cout << to_json_line(rep) << "\n";
    if (rep.verdict == Verdict::Fail) any_fail = true;
  }
  return any_fail ? kExitVerification : 0;
}

// ---- power ----------------------------------------------------------------

std::vector<Vector> parse_theta_grid(const std::string& text, Index p) {
  std::vector<Vector> grid;
  for (const std::string& part : split(text, ';')) {
    if (part.empty()) continue;
    const std::vector<std::string> comps = split(part, ',');
    Vector theta(static_cast<Index>(comps.size()));
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const auto value = parse_double(comps[i]);
      if (!value) throw std::runtime_error("bad theta component '" + comps[i] + "'");
      theta[static_cast<Index>(i)] = *value;
    }
    if (theta.size() != p) {
      throw std::runtime_error("theta grid entry has wrong length");
    }
    grid.push_back(std::move(theta));
  }
  return grid;
}

Matrix parse_matrix_rows(const std::string& text) {
  const std::vector<std::string> row_specs = split(text, ';');
  std::vector<std::vector<double>> rows;
  for (const std::string& row_spec : row_specs) {
    if (row_spec.empty()) continue;
    std::vector<double> row;
    for (const std::string& comp : split(row_spec, ',')) {
      const auto value = parse_double(comp);
      if (!value) throw std::runtime_error("bad matrix entry '" + comp + "'");
      row.push_back(*value);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty matrix");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) {
      throw std::runtime_error("ragged matrix spec");
    }
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return m;
}

// Canonical form of the logical configuration (worker count excluded), hashed
// with 64-bit FNV-1a so the digest is stable across platforms.
std::string config_hash(const SimConfig& cfg) {
  std::string canon = "alpha=" + fmt17(cfg.alpha) + ";dim=" +
                      std::to_string(cfg.dim) + ";n=" + std::to_string(cfg.n) +
                      ";p1=" + std::to_string(cfg.split) +
                      ";reps=" + std::to_string(cfg.reps) +
                      ";seed=" + std::to_string(cfg.seed) + ";sigma=";
  const Matrix& s = cfg.sigma.matrix();
  for (Index i = 0; i < s.rows(); ++i)
    for (Index j = 0; j < s.cols(); ++j) canon += fmt17(s(i, j)) + ",";
  canon += ";thetas=";
  for (const Vector& theta : cfg.theta_grid) {
    for (Index i = 0; i < theta.size(); ++i) canon += fmt17(theta[i]) + ",";
    canon += ";";
  }
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct PowerArgs {
  std::string config_path;
  long n = 0;
  Index p = 0, p1 = 0;
  double alpha = 0.0;
  long reps = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> theta_specs;
  std::string sigma_spec;
  std::string out_path;
  std::string manifest_path;
  int threads = 1;
};

SimConfig config_from_json(const std::string& path, int threads) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  nlohmann::json j;
  in >> j;
  const Index p = j.at("p").get<Index>();
  const Index p1 = j.at("p1").get<Index>();
  Matrix sigma = Matrix::Identity(p, p);
  if (j.contains("sigma")) {
    const auto& js = j.at("sigma");
    sigma.resize(static_cast<Index>(js.size()), p);
    for (Index i = 0; i < sigma.rows(); ++i)
      for (Index c = 0; c < p; ++c)
        sigma(i, c) = js.at(static_cast<std::size_t>(i))
                          .at(static_cast<std::size_t>(c))
                          .get<double>();
  }
  SimConfig cfg{j.at("seed").get<std::uint64_t>(),
                j.at("reps").get<long>(),
                j.at("n").get<long>(),
                p,
                p1,
                j.at("alpha").get<double>(),
                PartitionedSpdMatrix(sigma, p1),
                {},
                j.contains("threads") ? j.at("threads").get<int>() : threads};
  for (const auto& jt : j.at("theta_grid")) {
    Vector theta(static_cast<Index>(jt.size()));
    for (Index i = 0; i < theta.size(); ++i)
      theta[i] = jt.at(static_cast<std::size_t>(i)).get<double>();
    cfg.theta_grid.push_back(std::move(theta));
  }
  return cfg;
}

int run_power(const PowerArgs& args, bool flags_given) {
  SimConfig cfg{0, 0, 0, 2, 1, 0.05,
                PartitionedSpdMatrix(Matrix::Identity(2, 2), 1), {}, 1};
  try {
    if (!args.config_path.empty()) {
      if (flags_given) {
        std::cerr << "error: --config conflicts with direct flags\n";
        return kExitUsage;
      }
      cfg = config_from_json(args.config_path, args.threads);
    } else {
      if (args.p < 2 || args.p1 < 1 || args.n < 1 || args.reps < 1) {
        std::cerr << "error: power needs --n --p --p1 --alpha --reps\n";
        return kExitUsage;
      }
      Matrix sigma = args.sigma_spec.empty()
                         ? Matrix(Matrix::Identity(args.p, args.p))
                         : parse_matrix_rows(args.sigma_spec);
      cfg = SimConfig{args.seed,
                      args.reps,
                      args.n,
                      args.p,
                      args.p1,
                      args.alpha,
                      PartitionedSpdMatrix(sigma, args.p1),
                      {},
                      args.threads};
      std::string joined;
      for (const std::string& spec : args.theta_specs) {
        if (!joined.empty()) joined += ";";
        joined += spec;
      }
      if (joined.empty()) {
        // Size-only run at the null point.
        cfg.theta_grid.push_back(Vector::Zero(cfg.dim));
      } else {
        cfg.theta_grid = parse_theta_grid(joined, cfg.dim);
      }
    }
    validate(cfg);
  } catch (const std::exception& ex) {
    std::cerr << "error: config: " << ex.what() << "\n";
    return kExitUsage;
  }

  const std::string started = utc_timestamp();
  std::vector<PowerRow> rows;
  try {
    rows = power_table(cfg);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return map_data_error(err);
  }
  const std::string finished = utc_timestamp();

  std::ostringstream table;
  table << tsv_header() << "\n";
  for (const PowerRow& row : rows) table << to_tsv_row(row, cfg) << "\n";

  if (args.out_path.empty()) {
    std::cout << table.str();
  } else {
    std::ofstream out(args.out_path);
    if (!out) {
      std::cerr << "error: cannot write " << args.out_path << "\n";
      return kExitUsage;
    }
    out << table.str();
  }

  const std::string manifest =
      std::string("{\"command\":\"power\",\"config_hash\":\"") +
      config_hash(cfg) + "\",\"seed\":" + std::to_string(cfg.seed) +
      ",\"tool_version\":\"" + kToolVersion + "\",\"started\":\"" + started +
      "\",\"finished\":\"" + finished + "\"}";
  if (args.manifest_path.empty()) {
    std::cerr << manifest << "\n";
  } else {
    std::ofstream out(args.manifest_path);
    if (!out) {
      std::cerr << "error: cannot write " << args.manifest_path << "\n";
      return kExitUsage;
    }
    out << manifest << "\n";
  }
  return 0;
}

// ---- geometry ---------------------------------------------------------------

int run_geometry(const std::string& region_name, long directions,
                 std::uint64_t seed, Index dim, Index split, double k,
                 long n) {
  Region region;
  if (region_name == "t2") {
    region = Region::T2;
  } else if (region_name == "u") {
    region = Region::U;
  } else {
    std::cerr << "error: --region must be t2 or u\n";
    return kExitUsage;
  }
  if (!(k > 0.0)) {
    std::cerr << "error: --k must be > 0\n";
    return kExitUsage;
  }
  if (directions < 1 || split < 1 || split >= dim || n < 2) {
    std::cerr << "error: bad geometry flags\n";
    return kExitUsage;
  }

  // One random scatter for the whole sweep, then random unit directions; for
  // the adjusted region the p2 directions spanning the zero-adjusted-mean
  // subspace are appended, where the exit radius must be infinite.
  SplitMix64 srng = SplitMix64::substream(seed, 1ull << 40);
  Matrix l(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) l(i, j) = srng.next_gaussian();
  Matrix s = l * l.transpose();
  s.diagonal().array() += 1e-3 * static_cast<double>(dim);
  const PartitionedSpdMatrix scatter((s + s.transpose()) / 2.0, split);

  std::vector<Vector> dirs;
  for (long i = 0; i < directions; ++i) {
    SplitMix64 rng = SplitMix64::substream(seed, static_cast<std::uint64_t>(i));
    Vector d(dim);
    double norm = 0.0;
    do {
      for (Index j = 0; j < dim; ++j) d[j] = rng.next_gaussian();
      norm = d.norm();
    } while (norm < 1e-12);
    dirs.push_back(d / norm);
  }
  if (region == Region::U) {
    Eigen::LLT<Matrix> llt22(Matrix(scatter.block22()));
    const Matrix r =
        Matrix(llt22.solve(Matrix(scatter.block21()))).transpose();
    for (Index j = 0; j < scatter.coSplit(); ++j) {
      Vector t = Vector::Zero(scatter.coSplit());
      t[j] = 1.0;
      Vector d(dim);
      d.head(split) = r * t;
      d.tail(scatter.coSplit()) = t;
      dirs.push_back(d / d.norm());
    }
  }

  long infinite = 0;
  for (const Vector& d : dirs) {
    const ConeProbeResult res = region_exit_radius(region, d, scatter, n, k);
    std::cout << to_json_line(res) << "\n";
    if (is_infinite_radius(res)) ++infinite;
  }
  std::cout << "{\"summary\":{\"region\":\"" << region_name
            << "\",\"probes\":" << dirs.size() << ",\"infinite\":" << infinite
            << ",\"any_infinite\":" << (infinite > 0 ? "true" : "false")
            << "}}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Test statistics, matrix-inequality verifiers, Monte Carlo "
               "power tables and acceptance-region geometry probes for mean "
               "tests with covariates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // stats
  auto* stats_cmd = app.add_subcommand(
      "stats", "Compute T2/U/W/M statistics from a CSV dataset");
  std::string stats_path;
  Index stats_p1 = 1;
  bool stats_json = false, stats_tsv = false;
  stats_cmd->add_option("input", stats_path, "CSV file, n rows x p columns")
      ->required();
  stats_cmd->add_option("--p1", stats_p1, "size of the leading block")
      ->required();
  stats_cmd->add_flag("--json", stats_json, "machine-readable JSON output");
  stats_cmd->add_flag("--tsv", stats_tsv, "machine-readable TSV output");

  // verify
  auto* verify_cmd = app.add_subcommand(
      "verify", "Run randomized matrix-inequality and region verifiers");
  std::string lemma = "all";
  VerifierConfig vcfg;
  verify_cmd->add_option("--lemma", lemma, "all or a verifier id");
  verify_cmd->add_option("--seed", vcfg.seed, "stream seed");
  verify_cmd->add_option("--trials", vcfg.trials, "number of trials");
  verify_cmd->add_option("--dim", vcfg.dim, "matrix dimension p");
  verify_cmd->add_option("--split", vcfg.split, "leading block size p1");
  verify_cmd->add_option("--tol", vcfg.tol, "normalized margin tolerance");
  verify_cmd->add_option("--step", vcfg.step, "finite-difference step");
  verify_cmd->add_option("--threads", vcfg.threads, "worker threads");

  // power
  auto* power_cmd = app.add_subcommand(
      "power", "Monte Carlo critical values and power table (TSV)");
  PowerArgs pargs;
  auto* opt_config = power_cmd->add_option("--config", pargs.config_path,
                                           "JSON config file");
  auto* opt_n = power_cmd->add_option("--n", pargs.n, "sample size");
  auto* opt_p = power_cmd->add_option("--p", pargs.p, "dimension");
  auto* opt_p1 = power_cmd->add_option("--p1", pargs.p1, "leading block size");
  auto* opt_alpha = power_cmd->add_option("--alpha", pargs.alpha, "level");
  auto* opt_reps = power_cmd->add_option("--reps", pargs.reps, "replicates");
  auto* opt_seed = power_cmd->add_option("--seed", pargs.seed, "stream seed");
  auto* opt_grid = power_cmd->add_option(
      "--theta-grid", pargs.theta_specs,
      "semicolon-separated mean vectors, comma-separated components");
  auto* opt_sigma = power_cmd->add_option(
      "--sigma", pargs.sigma_spec,
      "dispersion matrix rows, e.g. \"2,1;1,1\" (default identity)");
  power_cmd->add_option("--out", pargs.out_path, "write TSV here");
  power_cmd->add_option("--manifest", pargs.manifest_path,
                        "write run manifest here (default stderr)");
  power_cmd->add_option("--threads", pargs.threads, "worker threads");

  // geometry
  auto* geom_cmd = app.add_subcommand(
      "geometry", "Exit-radius sweep of an acceptance region");
  std::string region_name;
  long geom_directions = 100;
  std::uint64_t geom_seed = 0;
  Index geom_dim = 4, geom_split = 2;
  double geom_k = 10.0;
  long geom_n = 2;
  geom_cmd->add_option("--region", region_name, "t2 or u")->required();
  geom_cmd->add_option("--directions", geom_directions, "random directions");
  geom_cmd->add_option("--seed", geom_seed, "stream seed");
  geom_cmd->add_option("--dim", geom_dim, "dimension p");
  geom_cmd->add_option("--split", geom_split, "leading block size p1");
  geom_cmd->add_option("--k", geom_k, "acceptance threshold");
  geom_cmd->add_option("--n", geom_n, "sample size in the n(n-1) factor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (stats_cmd->parsed()) {
      if (stats_json && stats_tsv) {
        std::cerr << "error: --json and --tsv are mutually exclusive\n";
        return kExitUsage;
      }
      return run_stats(stats_path, stats_p1, stats_json, stats_tsv);
    }
    if (verify_cmd->parsed()) return run_verify(lemma, vcfg);
    if (power_cmd->parsed()) {
      const bool flags_given = opt_n->count() || opt_p->count() ||
                               opt_p1->count() || opt_alpha->count() ||
                               opt_reps->count() || opt_seed->count() ||
                               opt_grid->count() || opt_sigma->count();
      (void)opt_config;
      return run_power(pargs, flags_given);
    }
    if (geom_cmd->parsed()) {
      return run_geometry(region_name, geom_directions, geom_seed, geom_dim,
                          geom_split, geom_k, geom_n);
    }
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return map_data_error(err);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
