#include "tbdyn/scenario.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "tbdyn/error.hpp"

namespace tbdyn {

namespace {

using nlohmann::json;

// Typed access to one section, remembering which keys were read so unknown keys can be
// reported.
class Reader {
 public:
  Reader(const ConfigDocument& doc, std::string section)
      : doc_(doc), section_(std::move(section)) {
    if (section_.empty()) {
      node_ = &doc.root;
    } else if (doc.root.contains(section_)) {
      node_ = &doc.root.at(section_);
      if (!node_->is_object()) fail(section_, "must be a section");
    }
  }

  bool present() const { return node_ != nullptr; }
  bool has(const std::string& key) const { return node_ && node_->contains(key); }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const json* v = get(key);
    if (!v) return require(key, fallback);
    if (!v->is_number()) fail(key, "expected a number");
    return v->get<double>();
  }

  int integer(const std::string& key, std::optional<int> fallback = std::nullopt) {
    const json* v = get(key);
    if (!v) return require(key, fallback);
    if (!v->is_number()) fail(key, "expected an integer");
    const double x = v->get<double>();
    if (x != std::floor(x) || std::abs(x) > 2e9) fail(key, "expected an integer");
    return static_cast<int>(x);
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(key, "expected true or false");
    return v->get<bool>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const json* v = get(key);
    if (!v) return require(key, fallback);
    if (!v->is_string()) fail(key, "expected a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback =
                                                          std::nullopt) {
    const json* v = get(key);
    if (!v) return require(key, fallback);
    std::vector<double> out;
    auto push = [&](const json& x) {
      if (!x.is_number()) fail(key, "expected a list of numbers");
      out.push_back(x.get<double>());
    };
    if (v->is_array()) {
      for (const auto& x : *v) push(x);
    } else {
      push(*v);
    }
    return out;
  }

  std::vector<std::string> words(const std::string& key) {
    const json* v = get(key);
    std::vector<std::string> out;
    if (!v) return out;
    auto push = [&](const json& x) {
      if (!x.is_string()) fail(key, "expected a list of names");
      out.push_back(x.get<std::string>());
    };
    if (v->is_array()) {
      for (const auto& x : *v) push(x);
    } else {
      push(*v);
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const std::string field = section_.empty() ? key : section_ + "." + key;
    const int line = doc_.line_of(field);
    const std::string where = line > 0 ? fmt::format(" (line {})", line) : std::string();
    throw ConfigError(fmt::format("{}field '{}'{}: {}",
                                  doc_.source.empty() ? "" : doc_.source.string() + ": ", field,
                                  where, msg),
                      field, line);
  }

  void reject_unknown() const {
    if (!node_) return;
    for (const auto& [k, v] : node_->items()) {
      if (section_.empty() && v.is_object()) continue;
      if (!used_.count(k)) fail(k, "unknown key");
    }
  }

 private:
  const json* get(const std::string& key) {
    used_.insert(key);
    if (!node_ || !node_->contains(key)) return nullptr;
    return &node_->at(key);
  }

  template <class T>
  T require(const std::string& key, const std::optional<T>& fallback) const {
    if (!fallback) fail(key, "is required");
    return *fallback;
  }

  const ConfigDocument& doc_;
  std::string section_;
  const json* node_ = nullptr;
  std::set<std::string> used_;
};

constexpr const char* kSections[] = {"lattice", "state", "drive", "band", "time",
                                     "outputs", "oracle", "classical", "spectrum",
                                     "localization_map"};

DriveProtocol read_drive(Reader& r, const std::filesystem::path& base) {
  const std::string kind = r.text("kind");
  try {
    if (kind == "dc") return DriveProtocol::dc(r.number("f0"), r.number("g0"));
    if (kind == "harmonic") {
      return DriveProtocol::harmonic(r.number("f0"), r.number("f1"), r.number("omega"),
                                     r.number("g0"));
    }
    if (kind == "fourier") {
      return DriveProtocol::fourier(r.number("f0"), r.numbers("modes"), r.number("omega"),
                                    r.number("g0"));
    }
    if (kind == "tabulated") {
      auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_relative() ? (base / path).string() : path.string();
      };
      return tabulated_from_files(resolve(r.text("field_file")), resolve(r.text("hopping_file")),
                                  r.boolean("periodic", false));
    }
  } catch (const DomainError& e) {
    r.fail("kind", e.what());
  }
  r.fail("kind", "expected dc, harmonic, fourier or tabulated");
}

StateSpec read_state(Reader& r) {
  const std::string kind = r.text("kind");
  if (kind == "single_site") return SingleSite{r.integer("site", 0)};
  if (kind == "gaussian") {
    Gaussian g{r.number("center", 0.0), r.number("sigma"), r.number("kappa0", 0.0)};
    if (!(g.sigma > 0.0)) r.fail("sigma", "must be positive");
    return g;
  }
  if (kind == "explicit") {
    const auto re = r.numbers("amplitudes_re");
    const auto im = r.numbers("amplitudes_im", std::vector<double>(re.size(), 0.0));
    if (im.size() != re.size()) r.fail("amplitudes_im", "length differs from amplitudes_re");
    ExplicitAmplitudes e{r.integer("first_site", 0), {}};
    for (std::size_t i = 0; i < re.size(); ++i) e.values.emplace_back(re[i], im[i]);
    return e;
  }
  r.fail("kind", "expected single_site, gaussian or explicit");
}

json state_json(const StateSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SingleSite>) {
          return {{"kind", "single_site"}, {"site", s.site}};
        } else if constexpr (std::is_same_v<T, Gaussian>) {
          return {{"kind", "gaussian"}, {"center", s.center}, {"sigma", s.sigma}, {"kappa0", s.kappa0}};
        } else {
          json re = json::array(), im = json::array();
          for (auto c : s.values) {
            re.push_back(c.real());
            im.push_back(c.imag());
          }
          return {{"kind", "explicit"}, {"first_site", s.first_site}, {"amplitudes_re", re},
                  {"amplitudes_im", im}};
        }
      },
      spec);
}

void rehash(Scenario& s) {
  s.canonical["seed"] = s.seed;
  s.canonical["oracle"]["tolerance"] = s.oracle.tolerance;
  s.hash = fnv1a_hex(s.canonical.dump());
}

}  // namespace

std::string to_string(Output o) {
  switch (o) {
    case Output::phase_integrals: return "phase_integrals";
    case Output::observables: return "observables";
    case Output::state_snapshots: return "state_snapshots";
    case Output::band: return "band";
    case Output::invariant: return "invariant";
    case Output::classical: return "classical";
    case Output::localization_report: return "localization_report";
  }
  return "unknown";
}

std::optional<Output> output_from_string(const std::string& s) {
  for (auto o : {Output::phase_integrals, Output::observables, Output::state_snapshots, Output::band,
                 Output::invariant, Output::classical, Output::localization_report}) {
    if (to_string(o) == s) return o;
  }
  return std::nullopt;
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> t(samples);
  for (int i = 0; i < samples; ++i) t[i] = t_max * i / (samples - 1);
  t.back() = t_max;
  return t;
}

LatticeState Scenario::initial_state() const { return make_state(state, window, boundary); }

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return fmt::format("{:016x}", h);
}

Scenario scenario_from_document(const ConfigDocument& doc) {
  Scenario s;
  const auto base = doc.source.empty() ? std::filesystem::path(".") : doc.source.parent_path();

  Reader top(doc, "");
  s.name = top.text("name");
  if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos) {
    top.fail("name", "must be a non-empty name without path separators");
  }
  const double seed = top.number("seed", 0.0);
  if (seed < 0 || seed != std::floor(seed)) top.fail("seed", "must be a non-negative integer");
  s.seed = static_cast<std::uint64_t>(seed);
  for (const auto& [k, v] : doc.root.items()) {
    if (!v.is_object()) continue;
    bool known = false;
    for (const char* name : kSections) known = known || k == name;
    if (!known) top.fail(k, "unknown section");
  }
  top.reject_unknown();

  Reader lat(doc, "lattice");
  s.boundary = Boundary::open;
  const std::string boundary = lat.text("boundary", "open");
  if (boundary == "ring") {
    s.boundary = Boundary::ring;
  } else if (boundary != "open") {
    lat.fail("boundary", "expected open or ring");
  }
  if (lat.has("sites")) {
    const int L = lat.integer("sites");
    if (L < 3) lat.fail("sites", "need at least 3 sites");
    s.window = {-(L / 2), -(L / 2) + L - 1};
  } else {
    s.window = {lat.integer("n_min"), lat.integer("n_max")};
    if (s.window.size() < 3) lat.fail("n_max", "window needs at least 3 sites");
  }
  s.evolve.bloch_points = lat.integer("bloch_points", 0);
  const std::string method = lat.text("method", "site");
  if (method == "bloch") {
    s.evolve.method = EvolveMethod::bloch;
  } else if (method != "site") {
    lat.fail("method", "expected site or bloch");
  }
  s.evolve.leak_tolerance = lat.number("leak_tolerance", 1e-8);
  lat.reject_unknown();

  Reader st(doc, "state");
  if (!st.present()) st.fail("kind", "is required");
  s.state = read_state(st);
  st.reject_unknown();

  Reader dr(doc, "drive");
  if (!dr.present()) dr.fail("kind", "is required");
  s.drive = read_drive(dr, base);
  dr.reject_unknown();

  Reader band(doc, "band");
  if (band.present()) {
    const auto re = band.numbers("couplings");
    const auto im = band.numbers("couplings_im", std::vector<double>(re.size(), 0.0));
    if (im.size() != re.size()) band.fail("couplings_im", "length differs from couplings");
    if (re.size() < 2) band.fail("couplings", "need g_0 and at least g_1");
    std::vector<cplx> g;
    for (std::size_t i = 0; i < re.size(); ++i) g.emplace_back(re[i], im[i]);
    s.dispersion = SingleBandDispersion(std::move(g));
    const std::string conv = band.text("convention", "ladder");
    if (conv == "power_of_two") {
      s.convention = CommutatorConvention::power_of_two;
    } else if (conv != "ladder") {
      band.fail("convention", "expected ladder or power_of_two");
    }
  }
  band.reject_unknown();

  Reader tm(doc, "time");
  if (tm.has("periods")) {
    if (tm.has("t_max")) tm.fail("periods", "give either t_max or periods");
    double period = 0.0;
    if (auto p = s.drive.period()) {
      period = *p;
    } else if (s.drive.mean_field() != 0.0) {
      period = 2.0 * std::numbers::pi / std::abs(s.drive.mean_field());
    } else {
      tm.fail("periods", "drive has no period; use t_max");
    }
    s.time.t_max = tm.number("periods") * period;
  } else {
    s.time.t_max = tm.number("t_max");
  }
  if (!(s.time.t_max > 0.0)) tm.fail("t_max", "must be positive");
  s.time.samples = tm.integer("samples", 101);
  if (s.time.samples < 2) tm.fail("samples", "need at least 2 samples");
  tm.reject_unknown();

  Reader out(doc, "outputs");
  auto names = out.words("list");
  if (names.empty()) names = {"phase_integrals", "observables"};
  for (const auto& n : names) {
    const auto o = output_from_string(n);
    if (!o) out.fail("list", fmt::format("unknown output '{}'", n));
    s.outputs.insert(*o);
  }
  s.snapshot_times = out.numbers("snapshot_times", std::vector<double>{});
  for (double t : s.snapshot_times) {
    if (t < 0.0 || t > s.time.t_max) out.fail("snapshot_times", "times must lie in [0, t_max]");
  }
  out.reject_unknown();

  if (s.dispersion) {
    for (auto o : {Output::band, Output::invariant, Output::classical, Output::localization_report}) {
      if (s.wants(o)) {
        out.fail("list", fmt::format("output '{}' needs a nearest-neighbour scenario (no [band])",
                                     to_string(o)));
      }
    }
  }

  Reader orc(doc, "oracle");
  s.oracle.enabled = orc.boolean("enabled", false);
  s.oracle.tolerance = orc.number("tolerance", 1e-6);
  s.oracle.config.dt = orc.number("dt", 0.0);
  s.oracle.config.adaptive = orc.boolean("adaptive", true);
  s.oracle.config.tolerance = orc.number("step_tolerance", 1e-11);
  s.oracle.config.leak_tolerance = orc.number("leak_tolerance", 1e-8);
  if (!(s.oracle.tolerance > 0.0)) orc.fail("tolerance", "must be positive");
  if (s.oracle.config.dt < 0.0) orc.fail("dt", "must be non-negative");
  orc.reject_unknown();

  Reader cl(doc, "classical");
  const int samples = cl.integer("samples", 100000);
  if (samples < 1) cl.fail("samples", "must be positive");
  s.classical_samples = static_cast<std::size_t>(samples);
  s.delta = cl.number("delta", 1.0);
  if (!(s.delta > 0.0)) cl.fail("delta", "must be positive");
  cl.reject_unknown();

  Reader sp(doc, "spectrum");
  s.band_points = sp.integer("points", 64);
  s.ring_sites = sp.integer("ring_sites", 32);
  if (s.band_points < 2) sp.fail("points", "need at least 2 points");
  if (s.ring_sites < 8) sp.fail("ring_sites", "need at least 8 sites");
  sp.reject_unknown();

  Reader lm(doc, "localization_map");
  s.map_ratio_min = lm.number("ratio_min", 0.0);
  s.map_ratio_max = lm.number("ratio_max", 10.0);
  s.map_points = lm.integer("points", 201);
  if (s.map_points < 2) lm.fail("points", "need at least 2 points");
  if (!(s.map_ratio_max > s.map_ratio_min)) lm.fail("ratio_max", "must exceed ratio_min");
  lm.reject_unknown();

  // Fail early on states that do not fit the window.
  try {
    (void)s.initial_state();
  } catch (const DomainError& e) {
    st.fail("kind", e.what());
  }

  json c;
  c["name"] = s.name;
  c["lattice"] = {{"n_min", s.window.n_min},
                  {"n_max", s.window.n_max},
                  {"boundary", boundary},
                  {"method", method},
                  {"bloch_points", s.evolve.bloch_points},
                  {"leak_tolerance", s.evolve.leak_tolerance}};
  c["state"] = state_json(s.state);
  c["drive"] = s.drive.describe();
  if (const auto* tab = std::get_if<TabulatedDrive>(&s.drive.variant())) {
    c["drive_table"] = {{"t", tab->times}, {"f", tab->f}, {"g", tab->g}};
  }
  if (s.dispersion) {
    json g = json::array();
    for (auto x : s.dispersion->couplings()) g.push_back({x.real(), x.imag()});
    c["band"] = {{"couplings", g},
                 {"convention", s.convention == CommutatorConvention::ladder ? "ladder" : "power_of_two"}};
  }
  c["time"] = {{"t_max", s.time.t_max}, {"samples", s.time.samples}};
  json outs = json::array();
  for (auto o : s.outputs) outs.push_back(to_string(o));
  c["outputs"] = {{"list", outs}, {"snapshot_times", s.snapshot_times}};
  c["oracle"] = {{"enabled", s.oracle.enabled},
                 {"dt", s.oracle.config.dt},
                 {"adaptive", s.oracle.config.adaptive},
                 {"step_tolerance", s.oracle.config.tolerance},
                 {"leak_tolerance", s.oracle.config.leak_tolerance}};
  c["classical"] = {{"samples", s.classical_samples}, {"delta", s.delta}};
  c["spectrum"] = {{"points", s.band_points}, {"ring_sites", s.ring_sites}};
  c["localization_map"] = {
      {"ratio_min", s.map_ratio_min}, {"ratio_max", s.map_ratio_max}, {"points", s.map_points}};
  s.canonical = std::move(c);
  rehash(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_document(load_config(path));
}

void apply_overrides(Scenario& s, std::optional<std::uint64_t> seed, std::optional<double> tolerance) {
  if (seed) s.seed = *seed;
  if (tolerance) {
    if (!(*tolerance > 0.0)) throw ConfigError("--tolerance must be positive", "oracle.tolerance");
    s.oracle.tolerance = *tolerance;
  }
  rehash(s);
}

}  // namespace tbdyn
