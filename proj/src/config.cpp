#include "lodens/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lodens {

using json = nlohmann::ordered_json;

namespace {

const std::set<std::string> kCommands{"estimate", "risk-sim", "support-sim",
                                      "supereff-sim", "calibrate"};

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
  throw std::invalid_argument("config field '" + path + "': " + what);
}

std::string join(const std::string& a, const std::string& b)
{
  return a.empty() ? b : a + "." + b;
}

double as_double(const json& v, const std::string& path)
{
  if (!v.is_number())
    fail(path, "expected a number");
  return v.get<double>();
}

long long as_integer(const json& v, const std::string& path)
{
  if (v.is_number_integer())
    return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::fabs(d) < 9.0e15)
      return static_cast<long long>(d);
  }
  fail(path, "expected an integer");
}

std::vector<double> as_doubles(const json& v, const std::string& path)
{
  if (!v.is_array())
    fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_double(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::pair<double, double> as_pair(const json& v, const std::string& path)
{
  const auto d = as_doubles(v, path);
  if (d.size() != 2)
    fail(path, "expected [lower, upper]");
  return {d[0], d[1]};
}

//! Tracks which keys of an object were consumed.
class ObjectReader
{
public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path))
  {
    if (!j_.is_object())
      fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json* get(const std::string& key)
  {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key)
  {
    const json* v = get(key);
    if (!v)
      fail(join(path_, key), "is required");
    return *v;
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void finish() const
  {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        fail(join(path_, it.key()), "unknown key");
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

NamedParams read_named(const json& j, const std::string& path)
{
  NamedParams n;
  ObjectReader r(j, path);
  const json& name = r.require("name");
  if (!name.is_string())
    fail(r.path("name"), "expected a string");
  n.name = name.get<std::string>();
  if (const json* p = r.get("params")) {
    ObjectReader pr(*p, r.path("params"));
    for (auto it = p->begin(); it != p->end(); ++it) {
      pr.get(it.key());
      n.params[it.key()] = as_double(it.value(), pr.path(it.key()));
    }
    pr.finish();
  }
  r.finish();
  return n;
}

json write_named(const NamedParams& n)
{
  json j;
  j["name"] = n.name;
  json p = json::object();
  for (const auto& [k, v] : n.params)
    p[k] = v;
  j["params"] = p;
  return j;
}

double param(const NamedParams& n, const std::string& key,
             const std::string& path)
{
  const auto it = n.params.find(key);
  if (it == n.params.end())
    fail(path + ".params." + key, "is required for '" + n.name + "'");
  return it->second;
}

void allow_params(const NamedParams& n, std::initializer_list<const char*> keys,
                  const std::string& path)
{
  for (const auto& [k, v] : n.params) {
    bool ok = false;
    for (const char* a : keys)
      ok = ok || k == a;
    if (!ok)
      fail(path + ".params." + k, "unknown parameter for '" + n.name + "'");
  }
}

std::size_t dim_param(const NamedParams& n, const std::string& path)
{
  const double d = param(n, "d", path);
  if (!(d >= 1.0) || std::floor(d) != d)
    fail(path + ".params.d", "expected a positive integer");
  return static_cast<std::size_t>(d);
}

EstimatorSection read_estimator(const json& j, const std::string& path)
{
  EstimatorSection s;
  ObjectReader r(j, path);
  if (const json* v = r.get("kind")) {
    if (!v->is_string())
      fail(r.path("kind"), "expected a string");
    s.kind = v->get<std::string>();
    try {
      parse_estimator_kind(s.kind);
    } catch (const std::invalid_argument& e) {
      fail(r.path("kind"), e.what());
    }
  }
  if (const json* v = r.get("c1"))
    s.c1 = as_double(*v, r.path("c1"));
  if (const json* v = r.get("c3"))
    s.c3 = as_double(*v, r.path("c3"));
  if (const json* v = r.get("r"))
    s.r = as_double(*v, r.path("r"));
  if (const json* v = r.get("isotropic")) {
    if (!v->is_boolean())
      fail(r.path("isotropic"), "expected true or false");
    s.isotropic = v->get<bool>();
  }
  if (const json* v = r.get("beta"))
    s.beta = as_doubles(*v, r.path("beta"));
  if (const json* v = r.get("zeta1"))
    s.zeta1 = as_double(*v, r.path("zeta1"));
  if (const json* v = r.get("beta_range")) {
    if (!v->is_array())
      fail(r.path("beta_range"), "expected an array of [lower, upper] pairs");
    for (std::size_t i = 0; i < v->size(); ++i)
      s.beta_range.push_back(
        as_pair((*v)[i], r.path("beta_range") + "[" + std::to_string(i) + "]"));
  }
  if (const json* v = r.get("L_range"))
    s.L_range = as_pair(*v, r.path("L_range"));
  r.finish();

  if (s.c1 && !(*s.c1 > 0.0))
    fail(r.path("c1"), "must be positive");
  if (!(s.c3 > 0.0))
    fail(r.path("c3"), "must be positive");
  if (!(s.r >= 1.0))
    fail(r.path("r"), "must be >= 1");
  if (!(s.zeta1 > 0.0))
    fail(r.path("zeta1"), "must be positive");
  for (double b : s.beta)
    if (!(b > 0.0 && b <= 2.0))
      fail(r.path("beta"), "components must lie in (0, 2]");
  for (const auto& [lo, hi] : s.beta_range)
    if (!(lo > 0.0 && lo <= hi && hi <= 2.0))
      fail(r.path("beta_range"), "intervals must lie in (0, 2]");
  if (s.L_range.first < 0.0 || s.L_range.second < s.L_range.first)
    fail(r.path("L_range"), "must satisfy 0 <= lower <= upper");
  return s;
}

json write_estimator(const EstimatorSection& s)
{
  json j;
  j["kind"] = s.kind;
  if (s.c1)
    j["c1"] = *s.c1;
  j["c3"] = s.c3;
  j["r"] = s.r;
  j["isotropic"] = s.isotropic;
  j["beta"] = s.beta;
  j["zeta1"] = s.zeta1;
  json br = json::array();
  for (const auto& [lo, hi] : s.beta_range)
    br.push_back({lo, hi});
  j["beta_range"] = br;
  j["L_range"] = {s.L_range.first, s.L_range.second};
  return j;
}

SupportSection read_support(const json& j, const std::string& path)
{
  SupportSection s;
  ObjectReader r(j, path);
  {
    const json& b = r.require("box");
    ObjectReader br(b, r.path("box"));
    const auto lo = as_doubles(br.require("lower"), br.path("lower"));
    const auto hi = as_doubles(br.require("upper"), br.path("upper"));
    br.finish();
    try {
      s.box = Box(lo, hi);
    } catch (const std::invalid_argument& e) {
      fail(r.path("box"), e.what());
    }
  }
  const json& res = r.require("resolution");
  if (!res.is_array())
    fail(r.path("resolution"), "expected an array of integers");
  for (std::size_t i = 0; i < res.size(); ++i) {
    const long long v =
      as_integer(res[i], r.path("resolution") + "[" + std::to_string(i) + "]");
    if (v < 2)
      fail(r.path("resolution"), "must be >= 2 per axis");
    s.resolution.push_back(static_cast<std::size_t>(v));
  }
  if (s.resolution.size() != s.box.dims())
    fail(r.path("resolution"), "needs one entry per box axis");
  if (const json* v = r.get("c6")) {
    s.c6 = as_double(*v, r.path("c6"));
    if (s.c6 < 0.0)
      fail(r.path("c6"), "must be nonnegative");
  }
  if (const json* v = r.get("beta"))
    s.beta = as_double(*v, r.path("beta"));
  if (const json* v = r.get("gamma"))
    s.gamma = as_double(*v, r.path("gamma"));
  r.finish();
  return s;
}

json write_support(const SupportSection& s)
{
  json j;
  j["box"] = {{"lower", s.box.lower}, {"upper", s.box.upper}};
  j["resolution"] = s.resolution;
  j["c6"] = s.c6;
  if (s.beta)
    j["beta"] = *s.beta;
  if (s.gamma)
    j["gamma"] = *s.gamma;
  return j;
}

SupereffSection read_supereff(const json& j, const std::string& path)
{
  SupereffSection s;
  ObjectReader r(j, path);
  s.beta1 = as_double(r.require("beta1"), r.path("beta1"));
  s.beta2 = as_double(r.require("beta2"), r.path("beta2"));
  if (const json* v = r.get("t"))
    s.t = as_double(*v, r.path("t"));
  if (const json* v = r.get("c4"))
    s.c4 = as_double(*v, r.path("c4"));
  r.finish();
  if (!(s.beta2 > 0.0 && s.beta2 < s.beta1 && s.beta1 <= 2.0))
    fail(path, "requires 0 < beta2 < beta1 <= 2");
  if (!(s.c4 > 0.0))
    fail(r.path("c4"), "must be positive");
  return s;
}

CalibrateSection read_calibrate(const json& j, const std::string& path)
{
  CalibrateSection s;
  ObjectReader r(j, path);
  if (const json* v = r.get("c3_list"))
    s.c3_list = as_doubles(*v, r.path("c3_list"));
  if (const json* v = r.get("c6_list"))
    s.c6_list = as_doubles(*v, r.path("c6_list"));
  r.finish();
  for (double c : s.c3_list)
    if (!(c > 0.0))
      fail(r.path("c3_list"), "values must be positive");
  for (double c : s.c6_list)
    if (c < 0.0)
      fail(r.path("c6_list"), "values must be nonnegative");
  return s;
}

void require_for(bool present, const std::string& field,
                 const std::string& command)
{
  if (!present)
    fail(field, "is required for command '" + command + "'");
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text)
{
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                e.what());
  }
  ExperimentConfig c;
  ObjectReader r(j, "");
  const json& cmd = r.require("command");
  if (!cmd.is_string() || !kCommands.count(cmd.get<std::string>()))
    fail("command",
         "expected one of estimate, risk-sim, support-sim, supereff-sim, calibrate");
  c.command = cmd.get<std::string>();
  c.experiment_id = c.command;
  if (const json* v = r.get("experiment_id")) {
    if (!v->is_string() || v->get<std::string>().empty())
      fail("experiment_id", "expected a nonempty string");
    c.experiment_id = v->get<std::string>();
    for (char ch : c.experiment_id)
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ||
            ch == '-' || ch == '.'))
        fail("experiment_id", "may contain only letters, digits, '_', '-', '.'");
  }
  if (const json* v = r.get("density"))
    c.density = read_named(*v, "density");
  if (const json* v = r.get("kernel"))
    c.kernel = read_named(*v, "kernel");
  if (const json* v = r.get("estimator"))
    c.estimator = read_estimator(*v, "estimator");
  if (const json* v = r.get("n_list")) {
    if (!v->is_array())
      fail("n_list", "expected an array of integers");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const long long n = as_integer((*v)[i], "n_list[" + std::to_string(i) + "]");
      if (n < 2)
        fail("n_list", "sample sizes must be >= 2");
      c.n_list.push_back(n);
    }
    if (c.n_list.empty())
      fail("n_list", "must not be empty");
  }
  if (const json* v = r.get("replicates")) {
    const long long n = as_integer(*v, "replicates");
    if (n < 2)
      fail("replicates", "must be >= 2");
    c.replicates = static_cast<std::size_t>(n);
  }
  if (const json* v = r.get("points")) {
    if (!v->is_array())
      fail("points", "expected an array of points");
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string p = "points[" + std::to_string(i) + "]";
      if ((*v)[i].is_number())
        c.points.push_back({as_double((*v)[i], p)});
      else
        c.points.push_back(as_doubles((*v)[i], p));
    }
  }
  if (const json* v = r.get("seed")) {
    if (!v->is_number_unsigned() && !v->is_number_integer())
      fail("seed", "expected a nonnegative integer");
    if (!v->is_number_unsigned() && v->get<long long>() < 0)
      fail("seed", "expected a nonnegative integer");
    c.seed = v->get<std::uint64_t>();
  }
  if (const json* v = r.get("normalization")) {
    if (!v->is_string())
      fail("normalization", "expected a string");
    c.normalization = v->get<std::string>();
    try {
      const auto n = parse_normalization(c.normalization);
      if (n == Normalization::support_rate)
        fail("normalization", "support_rate is implied by support-sim");
    } catch (const std::invalid_argument& e) {
      if (std::string(e.what()).rfind("config field", 0) == 0)
        throw;
      fail("normalization", e.what());
    }
  }
  if (const json* v = r.get("support"))
    c.support = read_support(*v, "support");
  if (const json* v = r.get("supereff"))
    c.supereff = read_supereff(*v, "supereff");
  if (const json* v = r.get("calibrate"))
    c.calibrate = read_calibrate(*v, "calibrate");
  if (const json* v = r.get("sample_file")) {
    if (!v->is_string())
      fail("sample_file", "expected a path string");
    c.sample_file = v->get<std::string>();
  }
  if (const json* v = r.get("output_dir")) {
    if (!v->is_string())
      fail("output_dir", "expected a path string");
    c.output_dir = v->get<std::string>();
  }
  r.finish();

  const std::string& cm = c.command;
  if (cm == "estimate") {
    require_for(c.sample_file.has_value(), "sample_file", cm);
    require_for(!c.points.empty(), "points", cm);
    require_for(c.estimator.c1.has_value(), "estimator.c1", cm);
  } else {
    require_for(!c.n_list.empty(), "n_list", cm);
    require_for(c.replicates > 0, "replicates", cm);
    if (cm != "supereff-sim")
      require_for(c.density.has_value(), "density", cm);
    if (cm == "risk-sim" || cm == "calibrate")
      require_for(!c.points.empty(), "points", cm);
    if (cm == "support-sim")
      require_for(c.support.has_value(), "support", cm);
    if (cm == "supereff-sim")
      require_for(c.supereff.has_value(), "supereff", cm);
    if (cm == "calibrate")
      require_for(c.calibrate.has_value(), "calibrate", cm);
  }
  // build the models once so parameter errors surface at parse time
  if (c.density) {
    const auto p = make_density(*c.density);
    make_kernel(c.kernel, p.dims());
    for (std::size_t i = 0; i < c.points.size(); ++i)
      if (c.points[i].size() != p.dims())
        fail("points[" + std::to_string(i) + "]",
             "dimension differs from the density");
    if (c.support && c.support->box.dims() != p.dims())
      fail("support.box", "dimension differs from the density");
  } else {
    const std::size_t d = c.points.empty() ? 1 : c.points.front().size();
    make_kernel(c.kernel, d);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& c)
{
  json j;
  j["command"] = c.command;
  j["experiment_id"] = c.experiment_id;
  if (c.density)
    j["density"] = write_named(*c.density);
  j["kernel"] = write_named(c.kernel);
  j["estimator"] = write_estimator(c.estimator);
  j["n_list"] = c.n_list;
  if (c.replicates > 0)
    j["replicates"] = c.replicates;
  j["points"] = c.points;
  j["seed"] = c.seed;
  j["normalization"] = c.normalization;
  if (c.support)
    j["support"] = write_support(*c.support);
  if (c.supereff)
    j["supereff"] = {{"beta1", c.supereff->beta1},
                     {"beta2", c.supereff->beta2},
                     {"t", c.supereff->t},
                     {"c4", c.supereff->c4}};
  if (c.calibrate)
    j["calibrate"] = {{"c3_list", c.calibrate->c3_list},
                      {"c6_list", c.calibrate->c6_list}};
  if (c.sample_file)
    j["sample_file"] = *c.sample_file;
  if (c.output_dir)
    j["output_dir"] = *c.output_dir;
  return j.dump();
}

DensityModel make_density(const NamedParams& spec)
{
  const std::string path = "density";
  try {
    if (spec.name == "triangular") {
      allow_params(spec, {}, path);
      return triangular_density();
    }
    if (spec.name == "uniform") {
      allow_params(spec, {"lower", "upper"}, path);
      return uniform_density(param(spec, "lower", path),
                             param(spec, "upper", path));
    }
    if (spec.name == "product_triangular") {
      allow_params(spec, {"d"}, path);
      return product_triangular_density(dim_param(spec, path));
    }
    if (spec.name == "margin_family") {
      allow_params(spec, {"beta", "gamma", "d"}, path);
      const std::size_t d =
        spec.params.count("d") ? dim_param(spec, path) : 1;
      return margin_family(param(spec, "beta", path),
                           param(spec, "gamma", path), d);
    }
  } catch (const std::invalid_argument& e) {
    if (std::string(e.what()).rfind("config field", 0) == 0)
      throw;
    fail(path, e.what());
  }
  fail(path + ".name", "unknown density '" + spec.name +
                         "' (triangular, uniform, product_triangular, margin_family)");
}

KernelSpec make_kernel(const NamedParams& spec, std::size_t d)
{
  const std::string path = "kernel";
  try {
    if (spec.name == "triangular") {
      allow_params(spec, {}, path);
      return KernelSpec::product(UnivariateKernel::triangular(), d);
    }
    if (spec.name == "epanechnikov") {
      allow_params(spec, {}, path);
      return KernelSpec::product(UnivariateKernel::epanechnikov(), d);
    }
    if (spec.name == "biweight") {
      allow_params(spec, {}, path);
      return KernelSpec::product(UnivariateKernel::biweight(), d);
    }
    if (spec.name == "power") {
      allow_params(spec, {"exponent"}, path);
      return KernelSpec::product(
        UnivariateKernel::power(param(spec, "exponent", path)), d);
    }
    if (spec.name == "holder") {
      allow_params(spec, {"beta"}, path);
      const auto k = holder_kernel(param(spec, "beta", path));
      return KernelSpec(std::vector<UnivariateKernel>(d, k.component(0)),
                        k.holder_modulus());
    }
  } catch (const std::invalid_argument& e) {
    if (std::string(e.what()).rfind("config field", 0) == 0)
      throw;
    fail(path, e.what());
  }
  fail(path + ".name", "unknown kernel '" + spec.name +
                         "' (triangular, epanechnikov, biweight, power, holder)");
}

EstimatorConfig resolve_estimator(const EstimatorSection& s,
                                  const std::optional<DensityModel>& density)
{
  EstimatorConfig e;
  if (s.c1)
    e.c1 = *s.c1;
  else if (density)
    e.c1 = 1.1 * density->sup_bound();
  else
    fail("estimator.c1", "is required without a reference density");
  e.c3 = s.c3;
  e.r = s.r;
  e.isotropic = s.isotropic;
  e.beta_range = s.beta_range;
  e.L_range = s.L_range;
  e.validate();
  return e;
}

RiskOptions make_risk_options(const ExperimentConfig& c, const DensityModel& p,
                              unsigned threads)
{
  RiskOptions o;
  o.experiment_id = c.experiment_id;
  o.kind = parse_estimator_kind(c.estimator.kind);
  o.normalization = parse_normalization(c.normalization);
  o.points = c.points;
  o.n_list = c.n_list;
  o.replicates = c.replicates;
  o.seed = c.seed;
  o.estimator = resolve_estimator(c.estimator, p);
  o.beta = c.estimator.beta.empty() ? p.holder().beta : c.estimator.beta;
  o.zeta1 = c.estimator.zeta1;
  o.threads = threads;
  return o;
}

SupportOptions make_support_options(const ExperimentConfig& c,
                                    const DensityModel& p, unsigned threads)
{
  if (!c.support)
    fail("support", "is required");
  SupportOptions o;
  o.experiment_id = c.experiment_id;
  o.kind = parse_estimator_kind(c.estimator.kind);
  o.n_list = c.n_list;
  o.replicates = c.replicates;
  o.seed = c.seed;
  o.box = c.support->box;
  o.resolution = c.support->resolution;
  o.estimator = resolve_estimator(c.estimator, p);
  o.c6 = c.support->c6;
  if (c.support->beta)
    o.beta = *c.support->beta;
  else if (!p.holder().beta.empty())
    o.beta = *std::min_element(p.holder().beta.begin(), p.holder().beta.end());
  if (c.support->gamma)
    o.gamma = *c.support->gamma;
  else if (p.margin())
    o.gamma = p.margin()->gamma;
  o.threads = threads;
  return o;
}

SuperefficiencyOptions make_supereff_options(const ExperimentConfig& c,
                                             unsigned threads)
{
  if (!c.supereff)
    fail("supereff", "is required");
  SuperefficiencyOptions o;
  o.experiment_id = c.experiment_id;
  o.beta1 = c.supereff->beta1;
  o.beta2 = c.supereff->beta2;
  o.t = c.supereff->t;
  o.c4 = c.supereff->c4;
  o.n_list = c.n_list;
  o.replicates = c.replicates;
  o.seed = c.seed;
  o.estimator.c1 = c.estimator.c1.value_or(0.0);
  o.estimator.c3 = c.estimator.c3;
  o.estimator.r = c.estimator.r;
  o.estimator.isotropic = c.estimator.isotropic;
  o.threads = threads;
  return o;
}

} // namespace lodens
