#include "qps/operator.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "qps/error.hpp"

namespace qps {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_box_size(std::size_t side, std::size_t max_side) {
  if (side > max_side) {
    throw Error(ErrorKind::BoxTooLarge,
                fmt::format("matrix side {} exceeds the dense cap {}", side, max_side));
  }
}

std::string site_string(const Site& n) {
  std::string s = "(";
  for (std::size_t j = 0; j < n.size(); ++j) s += (j ? "," : "") + std::to_string(n[j]);
  return s + ")";
}

}  // namespace

double PotentialSpec::evaluate(const Phase& y) const {
  double f = 0.0;
  for (const auto& [k, c] : coefficients) {
    double arg = 0.0;
    for (int j = 0; j < dimension; ++j) arg += k[j] * y[j];
    f += c * std::cos(kTwoPi * wrap_unit(arg));
  }
  return f;
}

double PotentialSpec::coefficient(const Site& k) const {
  auto it = coefficients.find(k);
  return it == coefficients.end() ? 0.0 : it->second;
}

double PotentialSpec::constant_term() const {
  return coefficient(Site(static_cast<std::size_t>(dimension), 0));
}

int PotentialSpec::range() const {
  int r = 0;
  for (const auto& [k, c] : coefficients) r = std::max(r, qps::sup_norm(k));
  return r;
}

PotentialSpec validate_potential(int dimension, const std::map<Site, double>& raw,
                                 double decay_rate, double normalization) {
  if (dimension < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
  if (!(decay_rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "decay rate must be positive");
  if (!(normalization > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "normalization constant must be positive");
  }
  PotentialSpec spec;
  spec.dimension = dimension;
  spec.decay_rate = decay_rate;
  spec.normalization = normalization;
  bool nonconstant = false;
  for (const auto& [k, c] : raw) {
    if (static_cast<int>(k.size()) != dimension) {
      throw Error(ErrorKind::InvalidArgument, "coefficient index of wrong dimension");
    }
    if (!std::isfinite(c)) throw Error(ErrorKind::InvalidArgument, "non-finite coefficient");
    const double cap = normalization * std::exp(-decay_rate * sup_norm(k));
    if (std::abs(c) > cap) {
      throw Error(ErrorKind::DecayViolation,
                  fmt::format("|fhat{}| = {} exceeds {}", site_string(k), std::abs(c), cap));
    }
    auto mirror = raw.find(negate(k));
    if (mirror == raw.end() ? c != 0.0 : mirror->second != c) {
      throw Error(ErrorKind::AsymmetricCoefficients,
                  fmt::format("fhat{} != fhat{}", site_string(k), site_string(negate(k))));
    }
    if (c != 0.0) {
      spec.coefficients.emplace(k, c);
      spec.sup_norm += std::abs(c);
      if (qps::sup_norm(k) != 0) nonconstant = true;
    }
  }
  if (!nonconstant) {
    throw Error(ErrorKind::ConstantPotential, "no nonzero coefficient with k != 0");
  }
  return spec;
}

PotentialSpec cosine_potential(int dimension) {
  std::map<Site, double> raw;
  for (int j = 0; j < dimension; ++j) {
    Site k(dimension, 0);
    k[j] = 1;
    raw[k] = 1.0;
    k[j] = -1;
    raw[k] = 1.0;
  }
  return validate_potential(dimension, raw, 1.0, std::numbers::e);
}

ModelParams ModelParams::make(PotentialSpec potential, double coupling, Frequency frequency,
                              Phase phase) {
  const auto d = static_cast<std::size_t>(potential.dimension);
  if (frequency.size() != d || phase.size() != d) {
    throw Error(ErrorKind::InvalidArgument, "frequency/phase dimension mismatch");
  }
  if (!(coupling >= 0.0) || !std::isfinite(coupling)) {
    throw Error(ErrorKind::InvalidArgument, "coupling must be finite and nonnegative");
  }
  for (double a : frequency) {
    if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorKind::InvalidArgument, "frequency outside [0,1]");
  }
  for (double x : phase) {
    if (!std::isfinite(x)) throw Error(ErrorKind::InvalidArgument, "non-finite phase");
  }
  ModelParams p;
  p.potential = std::move(potential);
  p.coupling = coupling;
  p.frequency = std::move(frequency);
  p.phase = wrap_phase(std::move(phase));
  return p;
}

ModelParams ModelParams::with_phase(Phase x) const {
  return make(potential, coupling, frequency, std::move(x));
}

ModelParams ModelParams::with_coupling(double lambda) const {
  return make(potential, lambda, frequency, phase);
}

ModelParams ModelParams::with_frequency(Frequency alpha) const {
  return make(potential, coupling, std::move(alpha), phase);
}

double potential_W(const Phase& x) {
  double w = 0.0;
  for (double c : x) w += 2.0 * std::cos(kTwoPi * wrap_unit(c));
  return w;
}

double HoppingSpec::coefficient(const Site& n, const Site& k) const {
  if (!site_coefficients.empty()) {
    auto it = site_coefficients.find({n, k});
    if (it != site_coefficients.end()) return it->second;
  }
  auto it = coefficients.find(k);
  return it == coefficients.end() ? 0.0 : it->second;
}

int HoppingSpec::range() const {
  int r = 0;
  for (const auto& [k, c] : coefficients) r = std::max(r, qps::sup_norm(k));
  for (const auto& [nk, c] : site_coefficients) r = std::max(r, sup_norm(nk.second));
  return r;
}

void HoppingSpec::validate() const {
  auto check = [&](const Site& k, double c) {
    if (sup_norm(k) == 0) throw Error(ErrorKind::InvalidArgument, "hopping with k = 0");
    if (std::abs(c) > normalization * std::exp(-decay_rate * sup_norm(k))) {
      throw Error(ErrorKind::DecayViolation,
                  fmt::format("hopping coefficient at k = {} violates the decay bound",
                              site_string(k)));
    }
  };
  for (const auto& [k, c] : coefficients) check(k, c);
  for (const auto& [nk, c] : site_coefficients) check(nk.second, c);
}

HoppingSpec HoppingSpec::from_potential(const PotentialSpec& potential) {
  HoppingSpec h;
  h.dimension = potential.dimension;
  h.decay_rate = potential.decay_rate;
  h.normalization = potential.normalization;
  for (const auto& [k, c] : potential.coefficients) {
    if (sup_norm(k) != 0) h.coefficients.emplace(k, c);
  }
  return h;
}

LatticeVector apply_hopping(const HoppingSpec& hopping, const LatticeVector& psi,
                            const SiteSet& domain) {
  LatticeVector out;
  for (const Site& n : domain.sites()) out.emplace(n, 0.0);
  // Scatter from the support of psi; equivalent to the gather form for t_{n,k}.
  for (const auto& [m, value] : psi) {
    if (value == 0.0) continue;
    if (!domain.contains(m)) {
      throw Error(ErrorKind::InvalidArgument, "apply_hopping: psi not supported in the domain");
    }
    if (hopping.site_coefficients.empty()) {
      for (const auto& [k, t] : hopping.coefficients) {
        // (T psi)(n) picks up t_{n,k} psi(n + k) with n = m - k
        Site n = subtract(m, k);
        auto it = out.find(n);
        if (it != out.end()) it->second += t * value;
      }
    } else {
      const int range = hopping.range();
      SiteSet near = SiteSet::cube(m, range);
      for (const Site& n : near.sites()) {
        if (n == m) continue;
        auto it = out.find(n);
        if (it == out.end()) continue;
        it->second += hopping.coefficient(n, subtract(m, n)) * value;
      }
    }
  }
  return out;
}

double Restriction::symmetry_defect() const {
  return (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
}

Restriction Restriction::restrict_to(SiteSetPtr subset) const {
  const std::size_t n = subset->size();
  std::vector<Eigen::Index> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto k = sites->index_of((*subset)[i]);
    if (!k) throw Error(ErrorKind::InvalidArgument, "restrict_to: site outside the restriction");
    idx[i] = static_cast<Eigen::Index>(*k);
  }
  Restriction r{std::move(subset), Matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      r.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = matrix(idx[i], idx[j]);
  return r;
}

Restriction build_primal(const ModelParams& params, SiteSetPtr sites, std::size_t max_side) {
  const std::size_t n = sites->size();
  check_box_size(n, max_side);
  const int d = params.dimension();
  Restriction r{sites, Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
  for (std::size_t i = 0; i < n; ++i) {
    const Site& s = (*sites)[i];
    const auto ii = static_cast<Eigen::Index>(i);
    r.matrix(ii, ii) = params.coupling * params.potential.evaluate(shift_phase(params.phase, s, params.frequency));
    for (int j = 0; j < d; ++j) {
      Site nb = s;
      nb[j] += 1;
      if (auto k = sites->index_of(nb)) {
        const auto kk = static_cast<Eigen::Index>(*k);
        r.matrix(ii, kk) = 1.0;
        r.matrix(kk, ii) = 1.0;
      }
    }
  }
  return r;
}

Restriction build_primal(const ModelParams& params, const Site& center, int radius,
                         std::size_t max_side) {
  return build_primal(params, make_cube(center, radius), max_side);
}

double dual_diagonal(const ModelParams& params, const Site& n) {
  return potential_W(shift_phase(params.phase, n, params.frequency)) +
         params.coupling * params.potential.constant_term();
}

Restriction build_dual(const ModelParams& params, SiteSetPtr sites, std::size_t max_side) {
  const std::size_t n = sites->size();
  check_box_size(n, max_side);
  Restriction r{sites, Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
  const double lambda = params.coupling;
  for (std::size_t i = 0; i < n; ++i) {
    const Site& s = (*sites)[i];
    const auto ii = static_cast<Eigen::Index>(i);
    r.matrix(ii, ii) = dual_diagonal(params, s);
    if (lambda == 0.0) continue;
    for (const auto& [k, c] : params.potential.coefficients) {
      if (sup_norm(k) == 0) continue;
      if (auto m = sites->index_of(add(s, k))) {
        r.matrix(ii, static_cast<Eigen::Index>(*m)) = lambda * c;
      }
    }
  }
  return r;
}

Restriction build_dual(const ModelParams& params, const Site& center, int radius,
                       std::size_t max_side) {
  return build_dual(params, make_cube(center, radius), max_side);
}

PotentialSpec parse_potential(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("potential: ") + e.what());
  }
  try {
    const int d = j.at("dimension").get<int>();
    const double eta = j.at("decay_rate").get<double>();
    const double c = j.value("normalization", 1.0);
    std::map<Site, double> raw;
    for (const auto& entry : j.at("coefficients")) {
      Site k = entry.at("k").get<Site>();
      if (!raw.emplace(k, entry.at("value").get<double>()).second) {
        throw Error(ErrorKind::ConfigInvalid, "potential: duplicate coefficient index");
      }
    }
    return validate_potential(d, raw, eta, c);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("potential: ") + e.what());
  }
}

PotentialSpec load_potential(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigInvalid, "cannot open potential file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_potential(ss.str());
}

std::string dump_potential(const PotentialSpec& potential) {
  nlohmann::json j;
  j["dimension"] = potential.dimension;
  j["decay_rate"] = potential.decay_rate;
  j["normalization"] = potential.normalization;
  j["coefficients"] = nlohmann::json::array();
  for (const auto& [k, c] : potential.coefficients) {
    j["coefficients"].push_back({{"k", k}, {"value", c}});
  }
  return j.dump(2);
}

}  // namespace qps
