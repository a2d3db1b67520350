#include "aucmi/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace aucmi::config {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"run", {"seed", "replicates", "threads", "out", "level"}},
      {"grid",
       {"thetas", "alpha0", "missingness", "sample_sizes", "beta1", "calibration_size",
        "calibration_seed"}},
      {"imputation",
       {"m", "iterations", "donor_count", "burn_in", "adaptive_rounding", "rounding_mean",
        "logreg_stabilizer"}},
      {"analysis", {"arms", "ci_methods"}},
      {"dataset", {"path", "delimiter", "has_header", "missing_token", "columns"}},
  };
  return keys;
}

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, delim)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  if (out.empty()) out.emplace_back();
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw std::invalid_argument("config key '" + key + "' = '" + value + "': " + why);
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    bad(key, s, "not a number");
  return v;
}

template <class T>
T to_unsigned(const std::string& key, const std::string& s) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) bad(key, s, "not a non-negative integer");
  return v;
}

int to_int(const std::string& key, const std::string& s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) bad(key, s, "not an integer");
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  bad(key, s, "expected true or false");
}

template <class T, class F>
std::vector<T> to_list(const std::string& key, const std::string& s, F&& conv) {
  std::vector<T> out;
  for (const auto& item : split(s, ',')) {
    if (item.empty()) bad(key, s, "empty list item");
    out.push_back(conv(key, item));
  }
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F&& f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + f(v[i]);
  return out;
}

char to_delimiter(const std::string& key, const std::string& s) {
  if (s == "tab") return '\t';
  if (s == "space") return ' ';
  if (s == "comma") return ',';
  if (s.size() == 1) return s[0];
  bad(key, s, "expected one character, tab, space or comma");
}

std::string delimiter_text(char d) {
  if (d == '\t') return "tab";
  if (d == ' ') return "space";
  if (d == ',') return "comma";
  return std::string(1, d);
}

long long grid_key(double v) { return std::llround(v * 1e6); }

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid config: " + what); };
  if (replicates < 1) fail("replicates must be at least 1");
  if (threads < 1) fail("threads must be at least 1");
  if (!(level > 0.0 && level < 1.0)) fail("level must lie in (0,1)");
  if (out.empty()) fail("out must not be empty");
  if (thetas.empty() || alpha0.empty() || missingness.empty() || sample_sizes.empty())
    fail("grid lists must not be empty");
  for (double t : thetas)
    if (!(t >= 0.5 && t < 1.0)) fail("thetas must lie in [0.5, 1)");
  for (const auto& m : missingness) {
    if (!(m.gamma >= 0.0 && m.gamma <= 1.0)) fail("gamma must lie in [0,1]");
    if (!(m.q1 > 0.0 && m.q1 < 1.0) || !(m.q2 > 0.0 && m.q2 < 1.0)) fail("q1 and q2 must lie in (0,1)");
    if (!(m.rho >= 0.0 && m.rho <= 1.0)) fail("rho label must lie in [0,1]");
  }
  for (auto n : sample_sizes)
    if (n < 4) fail("sample sizes must be at least 4");
  if (calibration_size < 100000) fail("calibration_size must be at least 100000");
  if (beta1 == Beta1Source::Published)
    for (double a : alpha0)
      for (double t : thetas) try {
          (void)sim::published_beta1(a, t);
        } catch (const std::out_of_range&) {
          fail("no published beta1 for alpha0 = " + fmt(a) + ", theta = " + fmt(t) +
               "; set beta1 = calibrated");
        }
  try {
    imputation.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (arms.empty()) fail("arms must not be empty");
  if (ci_methods.empty()) fail("ci_methods must not be empty");
  if (std::set<study::Arm>(arms.begin(), arms.end()).size() != arms.size()) fail("duplicate arm");
  if (std::set<roc::VarianceMethod>(ci_methods.begin(), ci_methods.end()).size() != ci_methods.size())
    fail("duplicate CI method");
  if (dataset) dataset->validate();
}

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config syntax error: ") + e.what());
  }

  RunConfig c;
  io::DatasetManifest manifest;
  bool has_dataset = false;
  std::string missing_token;
  std::vector<std::string> column_items;

  for (const auto& [section, body] : tree) {
    const auto sec = allowed_keys().find(section);
    if (sec == allowed_keys().end()) {
      if (body.empty()) throw std::invalid_argument("config key '" + section + "' outside a section");
      throw std::invalid_argument("unknown config section [" + section + "]");
    }
    if (section == "dataset") has_dataset = true;
    for (const auto& [key, node] : body) {
      const std::string full = section + "." + key;
      if (!sec->second.count(key)) throw std::invalid_argument("unknown config key '" + full + "'");
      const std::string v = node.data();

      if (full == "run.seed") c.seed = to_unsigned<std::uint64_t>(full, v);
      else if (full == "run.replicates") c.replicates = to_unsigned<std::size_t>(full, v);
      else if (full == "run.threads") c.threads = to_int(full, v);
      else if (full == "run.out") c.out = v;
      else if (full == "run.level") c.level = to_double(full, v);
      else if (full == "grid.thetas") c.thetas = to_list<double>(full, v, to_double);
      else if (full == "grid.alpha0") c.alpha0 = to_list<double>(full, v, to_double);
      else if (full == "grid.sample_sizes") c.sample_sizes = to_list<std::size_t>(full, v, to_unsigned<std::size_t>);
      else if (full == "grid.missingness") {
        c.missingness = to_list<MissingnessTriple>(full, v, [](const std::string& k, const std::string& item) {
          const auto parts = split(item, ':');
          if (parts.size() != 4) bad(k, item, "expected gamma:q1:q2:rho");
          return MissingnessTriple{to_double(k, parts[0]), to_double(k, parts[1]),
                                   to_double(k, parts[2]), to_double(k, parts[3])};
        });
      } else if (full == "grid.beta1") {
        if (v == "published") c.beta1 = Beta1Source::Published;
        else if (v == "calibrated") c.beta1 = Beta1Source::Calibrated;
        else bad(full, v, "expected published or calibrated");
      } else if (full == "grid.calibration_size") c.calibration_size = to_unsigned<std::size_t>(full, v);
      else if (full == "grid.calibration_seed") c.calibration_seed = to_unsigned<std::uint64_t>(full, v);
      else if (full == "imputation.m") c.imputation.m = to_int(full, v);
      else if (full == "imputation.iterations") c.imputation.iterations = to_int(full, v);
      else if (full == "imputation.donor_count") c.imputation.donor_count = to_int(full, v);
      else if (full == "imputation.burn_in") c.imputation.burn_in = to_int(full, v);
      else if (full == "imputation.adaptive_rounding") c.imputation.adaptive_rounding = to_bool(full, v);
      else if (full == "imputation.rounding_mean") {
        if (v == "full_column") c.imputation.rounding_mean = mi::RoundingMean::FullColumn;
        else if (v == "imputed_only") c.imputation.rounding_mean = mi::RoundingMean::ImputedOnly;
        else bad(full, v, "expected full_column or imputed_only");
      } else if (full == "imputation.logreg_stabilizer") {
        if (v == "ridge") c.imputation.stabilizer = mi::LogisticStabilizer::Ridge;
        else if (v == "augment") c.imputation.stabilizer = mi::LogisticStabilizer::Augment;
        else bad(full, v, "expected ridge or augment");
      } else if (full == "analysis.arms") {
        c.arms = to_list<study::Arm>(full, v, [](const std::string& k, const std::string& s) {
          try { return study::parse_arm(s); } catch (const std::invalid_argument&) { bad(k, s, "unknown arm"); }
        });
      } else if (full == "analysis.ci_methods") {
        c.ci_methods = to_list<roc::VarianceMethod>(full, v, [](const std::string& k, const std::string& s) {
          try { return roc::parse_variance_method(s); } catch (const std::invalid_argument&) { bad(k, s, "unknown CI method"); }
        });
      } else if (full == "dataset.path") manifest.path = v;
      else if (full == "dataset.delimiter") manifest.delimiter = to_delimiter(full, v);
      else if (full == "dataset.has_header") manifest.has_header = to_bool(full, v);
      else if (full == "dataset.missing_token") missing_token = v;
      else if (full == "dataset.columns") column_items = split(v, ',');
    }
  }

  if (has_dataset) {
    for (const auto& item : column_items) {
      const auto parts = split(item, ':');
      if (parts.size() != 3) bad("dataset.columns", item, "expected name:role:kind");
      io::ColumnSpec spec;
      spec.name = parts[0];
      try {
        spec.role = parse_role(parts[1]);
        spec.kind = parse_kind(parts[2]);
      } catch (const std::invalid_argument& e) {
        bad("dataset.columns", item, e.what());
      }
      spec.missing_token = missing_token;
      manifest.columns.push_back(spec);
    }
    c.dataset = manifest;
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in);
}

std::string to_text(const RunConfig& c) {
  std::ostringstream o;
  o << "[run]\n"
    << "seed = " << c.seed << '\n'
    << "replicates = " << c.replicates << '\n'
    << "threads = " << c.threads << '\n'
    << "out = " << c.out << '\n'
    << "level = " << fmt(c.level) << "\n\n";
  o << "[grid]\n"
    << "thetas = " << join(c.thetas, fmt) << '\n'
    << "alpha0 = " << join(c.alpha0, fmt) << '\n'
    << "missingness = "
    << join(c.missingness,
            [](const MissingnessTriple& m) {
              return fmt(m.gamma) + ":" + fmt(m.q1) + ":" + fmt(m.q2) + ":" + fmt(m.rho);
            })
    << '\n'
    << "sample_sizes = " << join(c.sample_sizes, [](std::size_t n) { return std::to_string(n); }) << '\n'
    << "beta1 = " << (c.beta1 == Beta1Source::Published ? "published" : "calibrated") << '\n'
    << "calibration_size = " << c.calibration_size << '\n'
    << "calibration_seed = " << c.calibration_seed << "\n\n";
  const auto& im = c.imputation;
  o << "[imputation]\n"
    << "m = " << im.m << '\n'
    << "iterations = " << im.iterations << '\n'
    << "donor_count = " << im.donor_count << '\n'
    << "burn_in = " << im.burn_in << '\n'
    << "adaptive_rounding = " << (im.adaptive_rounding ? "true" : "false") << '\n'
    << "rounding_mean = " << (im.rounding_mean == mi::RoundingMean::FullColumn ? "full_column" : "imputed_only") << '\n'
    << "logreg_stabilizer = " << (im.stabilizer == mi::LogisticStabilizer::Ridge ? "ridge" : "augment") << "\n\n";
  o << "[analysis]\n"
    << "arms = " << join(c.arms, [](study::Arm a) { return std::string(study::to_string(a)); }) << '\n'
    << "ci_methods = "
    << join(c.ci_methods, [](roc::VarianceMethod m) { return std::string(roc::to_string(m)); }) << '\n';
  if (c.dataset) {
    const auto& d = *c.dataset;
    o << "\n[dataset]\n"
      << "path = " << d.path << '\n'
      << "delimiter = " << delimiter_text(d.delimiter) << '\n'
      << "has_header = " << (d.has_header ? "true" : "false") << '\n'
      << "missing_token = " << (d.columns.empty() ? "" : d.columns.front().missing_token) << '\n'
      << "columns = "
      << join(d.columns,
              [](const io::ColumnSpec& s) {
                return s.name + ":" + std::string(to_string(s.role)) + ":" + std::string(to_string(s.kind));
              })
      << '\n';
  }
  return o.str();
}

std::string schema() {
  return "# Sections and keys; unknown sections or keys are rejected.\n"
         "# Values shown are the defaults.\n" +
         to_text(RunConfig{}) +
         "\n# [dataset] is required by analyze only:\n"
         "# [dataset]\n"
         "# path = data.csv\n"
         "# delimiter: one character, or tab / space / comma\n"
         "# delimiter = comma\n"
         "# has_header = true\n"
         "# empty cells are always missing, as is missing_token\n"
         "# missing_token = NA\n"
         "# columns = T:biomarker:continuous, D:disease:binary, AGE:covariate:continuous\n";
}

std::uint64_t scenario_id(double theta, double alpha0, const MissingnessTriple& t, std::size_t n) {
  return mix_stream_id({static_cast<std::uint64_t>(grid_key(theta)),
                        static_cast<std::uint64_t>(grid_key(alpha0)),
                        static_cast<std::uint64_t>(grid_key(t.gamma)),
                        static_cast<std::uint64_t>(grid_key(t.q1)),
                        static_cast<std::uint64_t>(grid_key(t.q2)), static_cast<std::uint64_t>(n)});
}

std::vector<sim::ScenarioConfig> build_scenarios(const RunConfig& c,
                                                 const std::vector<Beta1Entry>& beta1_table) {
  c.validate();
  auto beta1_for = [&](double a, double t) {
    for (const auto& e : beta1_table)
      if (grid_key(e.alpha0) == grid_key(a) && grid_key(e.theta) == grid_key(t)) return e.beta1;
    if (c.beta1 == Beta1Source::Calibrated)
      throw std::invalid_argument("no calibrated beta1 for alpha0 = " + fmt(a) + ", theta = " + fmt(t));
    return sim::published_beta1(a, t);
  };

  std::map<std::tuple<long long, long long, long long, long long>, sim::MissingnessParams> cache;
  std::vector<sim::ScenarioConfig> grid;
  for (const auto& triple : c.missingness) {
    for (double theta : c.thetas) {
      for (double a : c.alpha0) {
        sim::GenerativeParams params(a, beta1_for(a, theta));
        const auto key = std::make_tuple(grid_key(a), grid_key(theta), grid_key(triple.q1), grid_key(triple.q2));
        auto it = cache.find(key);
        if (it == cache.end()) {
          RandomStream rng(c.calibration_seed,
                           {static_cast<std::uint64_t>(std::get<0>(key)), static_cast<std::uint64_t>(std::get<1>(key)),
                            static_cast<std::uint64_t>(std::get<2>(key)), static_cast<std::uint64_t>(std::get<3>(key))});
          it = cache.emplace(key, sim::calibrate_thresholds(params, triple.gamma, triple.q1, triple.q2,
                                                            c.calibration_size, rng)).first;
        }
        double phi;
        try {
          phi = sim::prevalence_for_alpha0(a);
        } catch (const std::out_of_range&) {
          phi = 1.0 / (1.0 + std::exp(-a));
        }
        for (std::size_t n : c.sample_sizes) {
          sim::ScenarioConfig sc;
          sc.id = scenario_id(theta, a, triple, n);
          sc.n = n;
          sc.params = params;
          sc.missing = it->second;
          sc.missing.gamma = triple.gamma;
          sc.target_theta = theta;
          sc.target_phi = phi;
          sc.rho_label = triple.rho;
          sc.replicate_count = c.replicates;
          grid.push_back(std::move(sc));
        }
      }
    }
  }
  return grid;
}

study::StudyOptions study_options(const RunConfig& c) {
  study::StudyOptions o;
  o.arms = c.arms;
  o.ci_methods = c.ci_methods;
  o.imputation = c.imputation;
  o.imputation.rng_seed = c.seed;
  o.level = c.level;
  o.replicates = c.replicates;
  o.master_seed = c.seed;
  o.threads = c.threads;
  return o;
}

}  // namespace aucmi::config
