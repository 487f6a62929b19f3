#include "qndsim/circuit.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qndsim {

double gain_from_reflectivity(double reflectivity) {
  if (!(reflectivity > 0.0 && reflectivity <= 1.0)) {
    throw std::invalid_argument("R must lie in (0, 1]");
  }
  return (1.0 - reflectivity) / std::sqrt(reflectivity);
}

double reflectivity_from_gain(double gain) {
  if (!(gain >= 0.0) || !std::isfinite(gain)) {
    throw std::invalid_argument("gain must be finite and >= 0");
  }
  // Rationalized root avoids cancellation at large gain.
  const double u = 2.0 / (gain + std::sqrt(gain * gain + 4.0));
  return u * u;
}

GateParams GateParams::from_gain(double gain, double squeezing_db_a, double squeezing_db_b) {
  GateParams p;
  p.reflectivity = reflectivity_from_gain(gain);
  p.squeezing_db_a = squeezing_db_a;
  p.squeezing_db_b = squeezing_db_b;
  return p;
}

std::array<double, 4> GateParams::reflectivities() const {
  const double R = reflectivity;
  return {1.0 / (1.0 + R), R, R, R / (1.0 + R)};
}

void GateParams::validate() const {
  if (!(reflectivity > 0.0 && reflectivity <= 1.0)) {
    throw std::invalid_argument("R must lie in (0, 1]");
  }
  if (!std::isfinite(squeezing_db_a) || !std::isfinite(squeezing_db_b)) {
    throw std::invalid_argument("ancilla squeezing must be finite");
  }
  if (!(anti_squeeze_excess >= 1.0) || !std::isfinite(anti_squeeze_excess)) {
    throw std::invalid_argument("anti-squeeze excess must be finite and >= 1");
  }
}

std::string to_string(LossPlacement placement) {
  switch (placement) {
    case LossPlacement::PreGate:
      return "pre-gate";
    case LossPlacement::PostExit:
      return "post-exit";
    case LossPlacement::Distributed:
      return "distributed";
  }
  return "unknown";
}

LossPlacement loss_placement_from_string(const std::string& name) {
  if (name == "pre-gate") return LossPlacement::PreGate;
  if (name == "post-exit") return LossPlacement::PostExit;
  if (name == "distributed") return LossPlacement::Distributed;
  throw std::invalid_argument("unknown loss placement '" + name + "'");
}

ImperfectionModel ImperfectionModel::none() {
  ImperfectionModel m;
  m.propagation_loss = 0.0;
  m.detector_quantum_efficiency = 1.0;
  m.visibility = 1.0;
  m.dark_noise_db_below_shot = std::numeric_limits<double>::infinity();
  m.displacement_coupler_loss = 0.0;
  m.coupler_loss_enabled = false;
  m.feedforward_gain_error = 0.0;
  m.extra_inloop_loss = 0.0;
  return m;
}

double ImperfectionModel::homodyne_efficiency() const {
  return detector_quantum_efficiency * visibility * visibility;
}

double ImperfectionModel::dark_variance() const {
  if (std::isinf(dark_noise_db_below_shot)) {
    return 0.0;
  }
  return db_to_variance(-dark_noise_db_below_shot);
}

void ImperfectionModel::validate() const {
  auto fraction = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
    }
  };
  fraction(propagation_loss, "propagation_loss");
  fraction(detector_quantum_efficiency, "detector_quantum_efficiency");
  fraction(visibility, "visibility");
  fraction(displacement_coupler_loss, "displacement_coupler_loss");
  fraction(extra_inloop_loss, "extra_inloop_loss");
  if (propagation_loss >= 1.0 || displacement_coupler_loss >= 1.0 || extra_inloop_loss >= 1.0) {
    throw std::invalid_argument("a loss of 1 leaves no transmitted light");
  }
  if (homodyne_efficiency() <= 0.0) {
    throw std::invalid_argument("homodyne efficiency must be positive");
  }
  if (!(dark_noise_db_below_shot >= 0.0)) {
    throw std::invalid_argument("dark noise must be at least 0 dB below shot noise");
  }
  if (!std::isfinite(feedforward_gain_error) || feedforward_gain_error <= -1.0) {
    throw std::invalid_argument("feedforward gain error must be finite and > -1");
  }
}

Circuit::Circuit(std::size_t n_inputs) : n_inputs_(n_inputs) {
  if (n_inputs == 0) {
    throw std::invalid_argument("circuit needs at least one input mode");
  }
}

Circuit& Circuit::push(CircuitElement element) {
  elements_.push_back(std::move(element));
  return *this;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_mode(std::size_t mode, std::size_t n, std::size_t step) {
  if (mode >= n) {
    throw std::out_of_range("element " + std::to_string(step) + ": mode " + std::to_string(mode) +
                            " out of range (" + std::to_string(n) + " modes)");
  }
}

std::size_t after_removal(std::size_t index, std::size_t removed) {
  return index > removed ? index - 1 : index;
}

}  // namespace

void Circuit::validate() const {
  std::size_t n = n_inputs_;
  for (std::size_t step = 0; step < elements_.size(); ++step) {
    std::visit(overloaded{
                   [&](const AncillaInjection& a) {
                     if (!std::isfinite(a.r) || !std::isfinite(a.angle) ||
                         !(a.anti_squeeze_excess >= 1.0)) {
                       throw std::invalid_argument("invalid ancilla parameters");
                     }
                     ++n;
                   },
                   [&](const BeamSplitter& b) {
                     require_mode(b.i, n, step);
                     require_mode(b.j, n, step);
                     beam_splitter_matrix(n, b.i, b.j, b.reflectivity, b.signs);
                   },
                   [&](const Loss& l) {
                     require_mode(l.mode, n, step);
                     if (!(l.efficiency > 0.0 && l.efficiency <= 1.0)) {
                       throw std::invalid_argument("loss efficiency must lie in (0, 1]");
                     }
                   },
                   [&](const HomodyneFeedforward& h) {
                     require_mode(h.measured, n, step);
                     require_mode(h.target, n, step);
                     if (h.measured == h.target) {
                       throw std::invalid_argument("feedforward target equals measured mode");
                     }
                     if (!std::isfinite(h.gain) || !std::isfinite(h.angle)) {
                       throw std::invalid_argument("feedforward gain must be finite");
                     }
                     if (!(h.efficiency > 0.0 && h.efficiency <= 1.0) || !(h.dark_variance >= 0.0)) {
                       throw std::invalid_argument("invalid homodyne detector parameters");
                     }
                     --n;
                   },
                   [&](const Displacement& d) {
                     require_mode(d.mode, n, step);
                     if (!std::isfinite(d.dx) || !std::isfinite(d.dp)) {
                       throw std::invalid_argument("displacement must be finite");
                     }
                   },
               },
               elements_[step]);
  }
}

std::size_t Circuit::n_outputs() const {
  std::size_t n = n_inputs_;
  for (const auto& e : elements_) {
    if (std::holds_alternative<AncillaInjection>(e)) ++n;
    if (std::holds_alternative<HomodyneFeedforward>(e)) --n;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json circuit_to_json(const Circuit& circuit) {
  nlohmann::json elements = nlohmann::json::array();
  for (const auto& e : circuit.elements()) {
    std::visit(overloaded{
                   [&](const AncillaInjection& a) {
                     elements.push_back({{"type", "ancilla"},
                                         {"label", a.label},
                                         {"r", a.r},
                                         {"angle", a.angle},
                                         {"anti_squeeze_excess", a.anti_squeeze_excess}});
                   },
                   [&](const BeamSplitter& b) {
                     elements.push_back(
                         {{"type", "beam_splitter"},
                          {"i", b.i},
                          {"j", b.j},
                          {"reflectivity", b.reflectivity},
                          {"signs", {b.signs.ii, b.signs.ij, b.signs.ji, b.signs.jj}}});
                   },
                   [&](const Loss& l) {
                     elements.push_back({{"type", "loss"}, {"mode", l.mode}, {"efficiency", l.efficiency}});
                   },
                   [&](const HomodyneFeedforward& h) {
                     elements.push_back({{"type", "homodyne_feedforward"},
                                         {"measured", h.measured},
                                         {"angle", h.angle},
                                         {"target", h.target},
                                         {"target_quadrature", h.target_quadrature == Quadrature::X ? "x" : "p"},
                                         {"gain", h.gain},
                                         {"efficiency", h.efficiency},
                                         {"dark_variance", h.dark_variance}});
                   },
                   [&](const Displacement& d) {
                     elements.push_back({{"type", "displacement"}, {"mode", d.mode}, {"dx", d.dx}, {"dp", d.dp}});
                   },
               },
               e);
  }
  return {{"n_inputs", circuit.n_inputs()}, {"elements", std::move(elements)}};
}

Circuit circuit_from_json(const nlohmann::json& doc) {
  Circuit c(doc.at("n_inputs").get<std::size_t>());
  for (const auto& e : doc.at("elements")) {
    const auto type = e.at("type").get<std::string>();
    if (type == "ancilla") {
      c.push(AncillaInjection{e.at("label").get<std::string>(), e.at("r").get<double>(),
                              e.at("angle").get<double>(), e.value("anti_squeeze_excess", 1.0)});
    } else if (type == "beam_splitter") {
      BeamSplitterSigns s;
      if (e.contains("signs")) {
        const auto v = e.at("signs").get<std::vector<int>>();
        if (v.size() != 4) throw std::invalid_argument("beam splitter signs need 4 entries");
        s = {v[0], v[1], v[2], v[3]};
      }
      c.push(BeamSplitter{e.at("i").get<std::size_t>(), e.at("j").get<std::size_t>(),
                          e.at("reflectivity").get<double>(), s});
    } else if (type == "loss") {
      c.push(Loss{e.at("mode").get<std::size_t>(), e.at("efficiency").get<double>()});
    } else if (type == "homodyne_feedforward") {
      const auto q = e.at("target_quadrature").get<std::string>();
      if (q != "x" && q != "p") throw std::invalid_argument("target_quadrature must be x or p");
      c.push(HomodyneFeedforward{e.at("measured").get<std::size_t>(), e.at("angle").get<double>(),
                                 e.at("target").get<std::size_t>(),
                                 q == "x" ? Quadrature::X : Quadrature::P, e.at("gain").get<double>(),
                                 e.value("efficiency", 1.0), e.value("dark_variance", 0.0)});
    } else if (type == "displacement") {
      c.push(Displacement{e.at("mode").get<std::size_t>(), e.value("dx", 0.0), e.value("dp", 0.0)});
    } else {
      throw std::invalid_argument("unknown circuit element type '" + type + "'");
    }
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Heisenberg propagation

std::vector<LinearQuadExpr> heisenberg_outputs(const Circuit& circuit) {
  circuit.validate();
  std::vector<LinearQuadExpr> q;
  for (std::size_t k = 0; k < circuit.n_inputs(); ++k) {
    const std::string tag = std::to_string(k + 1) + "_in";
    q.push_back(LinearQuadExpr{{"x" + tag, 1.0}});
    q.push_back(LinearQuadExpr{{"p" + tag, 1.0}});
  }
  std::size_t n_vacua = 0;
  std::size_t n_dark = 0;

  auto apply_block = [&](const Matrix& s, std::size_t mode) {
    const LinearQuadExpr x = q[2 * mode];
    const LinearQuadExpr p = q[2 * mode + 1];
    q[2 * mode] = s(0, 0) * x + s(0, 1) * p;
    q[2 * mode + 1] = s(1, 0) * x + s(1, 1) * p;
  };
  auto lose = [&](std::size_t mode, double eta) {
    if (eta == 1.0) return;
    const std::string tag = "L" + std::to_string(n_vacua++);
    q[2 * mode] = std::sqrt(eta) * q[2 * mode] + LinearQuadExpr{{"x" + tag, std::sqrt(1.0 - eta)}};
    q[2 * mode + 1] =
        std::sqrt(eta) * q[2 * mode + 1] + LinearQuadExpr{{"p" + tag, std::sqrt(1.0 - eta)}};
  };

  for (const auto& element : circuit.elements()) {
    std::visit(
        overloaded{
            [&](const AncillaInjection& a) {
              // Squeeze in the rotated frame, then rotate back.
              const Matrix s = squeezer_matrix(1, 0, a.r, a.angle).matrix();
              const double c = std::cos(a.angle);
              const double sn = std::sin(a.angle);
              LinearQuadExpr x{{"x" + a.label + "0", 1.0}};
              LinearQuadExpr p{{"p" + a.label + "0", 1.0}};
              LinearQuadExpr xs = s(0, 0) * x + s(0, 1) * p;
              LinearQuadExpr ps = s(1, 0) * x + s(1, 1) * p;
              if (a.anti_squeeze_excess > 1.0) {
                // Extra classical noise on the anti-squeezed axis (-sin, cos) of the lab frame.
                const double w = std::exp(a.r) * std::sqrt(a.anti_squeeze_excess - 1.0);
                const LinearQuadExpr extra{{"e" + a.label + "0", w}};
                xs += (-sn) * extra;
                ps += c * extra;
              }
              q.push_back(std::move(xs));
              q.push_back(std::move(ps));
            },
            [&](const BeamSplitter& b) {
              const Matrix s = beam_splitter_matrix(2, 0, 1, b.reflectivity, b.signs).matrix();
              const LinearQuadExpr xi = q[2 * b.i], pi = q[2 * b.i + 1];
              const LinearQuadExpr xj = q[2 * b.j], pj = q[2 * b.j + 1];
              q[2 * b.i] = s(0, 0) * xi + s(0, 2) * xj;
              q[2 * b.i + 1] = s(1, 1) * pi + s(1, 3) * pj;
              q[2 * b.j] = s(2, 0) * xi + s(2, 2) * xj;
              q[2 * b.j + 1] = s(3, 1) * pi + s(3, 3) * pj;
            },
            [&](const Loss& l) { lose(l.mode, l.efficiency); },
            [&](const HomodyneFeedforward& h) {
              lose(h.measured, h.efficiency);
              if (h.angle != 0.0) {
                apply_block(rotation_matrix(1, 0, h.angle).matrix(), h.measured);
              }
              LinearQuadExpr readout = q[2 * h.measured];
              if (h.dark_variance > 0.0) {
                readout.add("d" + std::to_string(n_dark++), std::sqrt(h.dark_variance));
              }
              q[quad_index(h.target, h.target_quadrature)] += h.gain * readout;
              q.erase(q.begin() + static_cast<std::ptrdiff_t>(2 * h.measured),
                      q.begin() + static_cast<std::ptrdiff_t>(2 * h.measured + 2));
            },
            [&](const Displacement& d) {
              q[2 * d.mode].add("1", d.dx);
              q[2 * d.mode + 1].add("1", d.dp);
            },
        },
        element);
  }
  return q;
}

QuadratureMap circuit_quadrature_map(const Circuit& circuit) {
  auto q = heisenberg_outputs(circuit);
  if (q.size() != 4) {
    throw std::invalid_argument("circuit does not have exactly two output modes");
  }
  QuadratureMap m;
  for (std::size_t k = 0; k < 4; ++k) {
    m.outputs[k] = std::move(q[k]);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Gate compilation

namespace {

constexpr double kOracleTolerance = 1e-9;

Circuit compile_gate(const GateParams& params, const ImperfectionModel& imp, bool swap_entry_exit) {
  Circuit c(2);
  const double R = params.reflectivity;

  double pre = 1.0;
  double post = 1.0;
  const double transmitted = 1.0 - imp.propagation_loss;
  switch (imp.loss_placement) {
    case LossPlacement::PreGate:
      pre = transmitted;
      break;
    case LossPlacement::PostExit:
      post = transmitted;
      break;
    case LossPlacement::Distributed:
      pre = post = std::sqrt(transmitted);
      break;
  }
  if (pre < 1.0) {
    c.push(Loss{0, pre}).push(Loss{1, pre});
  }

  if (R < 1.0) {
    const auto refl = params.reflectivities();
    const double entry = swap_entry_exit ? refl[3] : refl[0];
    const double exit = swap_entry_exit ? refl[0] : refl[3];
    const double eta = imp.homodyne_efficiency();
    const double ff_gain = std::sqrt((1.0 - R) / R) / std::sqrt(eta) * (1.0 + imp.feedforward_gain_error);
    const double dark = imp.dark_variance();
    auto arm_losses = [&](std::size_t kept) {
      if (imp.coupler_loss_enabled && imp.displacement_coupler_loss > 0.0) {
        c.push(Loss{kept, 1.0 - imp.displacement_coupler_loss});
      }
      if (imp.extra_inloop_loss > 0.0) {
        c.push(Loss{kept, 1.0 - imp.extra_inloop_loss});
      }
    };

    // Entry: mode 0 -> sqrt(T) m1 - sqrt(R) m2, mode 1 -> sqrt(R) m1 + sqrt(T) m2.
    c.push(BeamSplitter{1, 0, entry, {}});

    // Arm on mode 0 squeezes x: the signal leaves through the ancilla port
    // (index 2) and the anti-squeezed p is cancelled by feedforward.
    c.push(AncillaInjection{"A", params.r_a(), 0.0, params.anti_squeeze_excess});
    c.push(BeamSplitter{0, 2, R, {1, 1, -1, -1}});
    c.push(HomodyneFeedforward{0, std::numbers::pi / 2, 2, Quadrature::P, ff_gain, eta, dark});
    // Modes are now (arm-1 input, squeezed arm 0).
    arm_losses(1);

    c.push(AncillaInjection{"B", params.r_b(), std::numbers::pi / 2, params.anti_squeeze_excess});
    c.push(BeamSplitter{0, 2, R, {1, -1, -1, 1}});
    c.push(HomodyneFeedforward{0, 0.0, 2, Quadrature::X, ff_gain, eta, dark});
    // Modes are back in arm order (0, 1).
    arm_losses(1);

    c.push(BeamSplitter{0, 1, exit, {}});
  }

  if (post < 1.0) {
    c.push(Loss{0, post}).push(Loss{1, post});
  }
  c.validate();
  return c;
}

}  // namespace

Circuit build_qnd_gate(const GateParams& params, const ImperfectionModel& imperfections) {
  params.validate();
  imperfections.validate();
  const QuadratureMap oracle = finite_squeezing_map(params.reflectivity, params.r_a(), params.r_b());
  GateParams pure = params;
  pure.anti_squeeze_excess = 1.0;
  double worst = 0.0;
  for (bool swap : {false, true}) {
    const Circuit lossless = compile_gate(pure, ImperfectionModel::none(), swap);
    const double err = circuit_quadrature_map(lossless).distance(oracle);
    if (err <= kOracleTolerance) {
      return compile_gate(params, imperfections, swap);
    }
    worst = err;
  }
  throw std::logic_error("compiled gate deviates from the finite-squeezing relations by " +
                         std::to_string(worst));
}

// ---------------------------------------------------------------------------
// Execution

namespace {

void notify(const ExecutionObserver* obs, const GaussianState& s) {
  if (obs != nullptr && obs->on_state) obs->on_state(s);
}

GaussianState apply_observed(const SymplecticMatrix& s, const GaussianState& state,
                             const ExecutionObserver* obs) {
  if (obs != nullptr && obs->on_symplectic) obs->on_symplectic(s);
  return apply(s, state);
}

GaussianState prepare_measured(GaussianState s, const HomodyneFeedforward& h,
                               const ExecutionObserver* obs) {
  if (h.efficiency < 1.0) {
    s = loss_channel(s, h.measured, h.efficiency);
  }
  if (h.angle != 0.0) {
    s = apply_observed(rotation_matrix(s.n_modes(), h.measured, h.angle), s, obs);
  }
  return s;
}

template <class Feedforward>
GaussianState execute(const Circuit& circuit, const GaussianState& input,
                      const ExecutionObserver* obs, Feedforward&& feedforward) {
  circuit.validate();
  if (input.n_modes() != circuit.n_inputs()) {
    throw std::invalid_argument("input has " + std::to_string(input.n_modes()) +
                                " modes, circuit expects " + std::to_string(circuit.n_inputs()));
  }
  GaussianState state = input;
  notify(obs, state);
  for (const auto& element : circuit.elements()) {
    state = std::visit(
        overloaded{
            [&](const AncillaInjection& a) {
              return tensor(state, squeezed_vacuum(a.r, a.angle, a.anti_squeeze_excess));
            },
            [&](const BeamSplitter& b) {
              return apply_observed(
                  beam_splitter_matrix(state.n_modes(), b.i, b.j, b.reflectivity, b.signs), state,
                  obs);
            },
            [&](const Loss& l) { return loss_channel(state, l.mode, l.efficiency); },
            [&](const HomodyneFeedforward& h) {
              return feedforward(prepare_measured(state, h, obs), h);
            },
            [&](const Displacement& d) { return displace(state, d.mode, d.dx, d.dp); },
        },
        element);
    notify(obs, state);
  }
  return state;
}

}  // namespace

GaussianState run_covariance(const Circuit& circuit, const GaussianState& input,
                             const ExecutionObserver* observer) {
  return execute(circuit, input, observer, [](const GaussianState& s, const HomodyneFeedforward& h) {
    // Outcome average of measure + displace: target += gain * (x_measured + dark).
    const auto n = static_cast<Eigen::Index>(2 * s.n_modes());
    const auto m = static_cast<Eigen::Index>(2 * h.measured);
    const auto t = static_cast<Eigen::Index>(quad_index(h.target, h.target_quadrature));
    Matrix map = Matrix::Identity(n, n);
    map(t, m) += h.gain;
    Vector mean = map * s.mean();
    Matrix cov = map * s.cov() * map.transpose();
    cov(t, t) += h.gain * h.gain * h.dark_variance;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k / 2 != m / 2) keep.push_back(k);
    }
    return GaussianState(mean(keep), cov(keep, keep));
  });
}

TrajectoryResult run_trajectory(const Circuit& circuit, const GaussianState& input,
                                NormalSource& noise, const ExecutionObserver* observer) {
  std::vector<double> outcomes;
  GaussianState out =
      execute(circuit, input, observer, [&](const GaussianState& s, const HomodyneFeedforward& h) {
        // Detector efficiency and rotation were already applied.
        const auto outcome =
            homodyne(s, h.measured, 0.0, noise, HomodyneNoise{1.0, h.dark_variance});
        outcomes.push_back(outcome.value);
        const std::size_t target = after_removal(h.target, h.measured);
        const double kick = h.gain * outcome.value;
        return h.target_quadrature == Quadrature::X
                   ? displace(outcome.reduced_state, target, kick, 0.0)
                   : displace(outcome.reduced_state, target, 0.0, kick);
      });
  return TrajectoryResult{std::move(out), std::move(outcomes)};
}

}  // namespace qndsim
