#include "gnr/gnode.hpp"

#include <boost/numeric/odeint.hpp>

#include <chrono>
#include <cmath>

namespace gnr {

Index layer_in_dim(const Layer& l) {
  if (std::holds_alternative<FcLayer>(l)) return std::get<FcLayer>(l).in_dim();
  return std::get<NodeLayer>(l).dynamics.dim();
}

Index layer_out_dim(const Layer& l) {
  if (std::holds_alternative<FcLayer>(l)) return std::get<FcLayer>(l).out_dim();
  return std::get<NodeLayer>(l).dynamics.dim();
}

bool layer_is_node(const Layer& l) {
  return std::holds_alternative<NodeLayer>(l);
}

Index GnodeModel::input_dim() const {
  if (layers.empty()) throw DimensionError("GnodeModel: no layers");
  return layer_in_dim(layers.front());
}

Index GnodeModel::output_dim() const {
  if (layers.empty()) throw DimensionError("GnodeModel: no layers");
  return layer_out_dim(layers.back());
}

Index GnodeModel::n_node_layers() const {
  Index n = 0;
  for (const auto& l : layers)
    if (layer_is_node(l)) ++n;
  return n;
}

void GnodeModel::validate() const {
  // Degenerate NODE-free chains are accepted so plain networks can be run
  // through the same front end.
  if (layers.empty()) throw DimensionError("GnodeModel: no layers");
  for (size_t i = 0; i < layers.size(); ++i) {
    if (layer_is_node(layers[i]))
      std::get<NodeLayer>(layers[i]).dynamics.validate();
    if (i + 1 < layers.size() &&
        layer_out_dim(layers[i]) != layer_in_dim(layers[i + 1]))
      throw DimensionError("GnodeModel: dimension chain break after layer " +
                           std::to_string(i));
  }
}

bool ReachResult::final_contains(const Vec& x, double tol) const {
  // Reverse order: end-to-end outputs usually live in the latest branch.
  const auto& sets = final_sets();
  for (auto it = sets.rbegin(); it != sets.rend(); ++it)
    if (star_contains_point(it->star, x, tol)) return true;
  return false;
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

[[noreturn]] void rethrow_at_layer(size_t i) {
  const std::string where = "layer " + std::to_string(i) + ": ";
  try {
    throw;
  } catch (const DimensionError& e) {
    throw DimensionError(where + e.what());
  } catch (const BranchLimitError& e) {
    throw BranchLimitError(where + e.what());
  } catch (const StepSizeError& e) {
    throw StepSizeError(where + e.what());
  } catch (const EmptySetError& e) {
    throw EmptySetError(where + e.what());
  } catch (const UnboundedError& e) {
    throw UnboundedError(where + e.what());
  } catch (const UnsupportedError& e) {
    throw UnsupportedError(where + e.what());
  } catch (const NumericError& e) {
    throw NumericError(where + e.what());
  } catch (const SolverError& e) {
    throw SolverError(where + e.what());
  }
}

}  // namespace

ReachResult reach(const GnodeModel& model, const StarSet& r0, ReachMode mode,
                  const ReachOptions& opts) {
  model.validate();
  check_dims(r0.dim() == model.input_dim(), "reach: input dimension mismatch");

  ReachResult result;
  result.input = r0;
  std::vector<TimedStar> branches{{r0, 0.0, 0.0}};
  LayerReachOptions lopts{opts.max_branches};

  for (size_t i = 0; i < model.layers.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    LayerReach record;
    std::vector<TimedStar> next;
    try {
      if (!layer_is_node(model.layers[i])) {
        const auto& fc = std::get<FcLayer>(model.layers[i]);
        record.method = mode == ReachMode::ExactStar ? "exact-star" : "approx-star";
        for (const auto& br : branches) {
          auto mapped = fc_reach(fc, br.star, mode, lopts);
          for (auto& s : mapped) next.push_back({std::move(s), br.t_lo, br.t_hi});
          if (static_cast<Index>(next.size()) > opts.max_branches)
            throw BranchLimitError("reach: branch cap exceeded");
        }
      } else {
        const auto& nl = std::get<NodeLayer>(model.layers[i]);
        const bool linear = nl.dynamics.is_linear();
        record.method = linear ? "direct" : "zono-f";
        TimeConfig eff = nl.time;
        if (opts.record_interval_flowpipes) eff.mode = OutputMode::FlowpipeMode;
        for (size_t bi = 0; bi < branches.size(); ++bi) {
          const auto& br = branches[bi];
          Flowpipe pipe;
          if (linear) {
            pipe = linear_reach(collapse_linear(nl.dynamics), br.star, eff);
          } else {
            pipe = nonlinear_reach(nl.dynamics, star_to_zonotope(br.star),
                                   eff, opts.nonlinear);
          }
          if (nl.time.mode == OutputMode::FinalSet) {
            next.push_back({reach_set_as_star(pipe.final_set()), nl.time.t_f,
                            nl.time.t_f});
          } else {
            for (const auto& st : pipe.steps)
              next.push_back({reach_set_as_star(st.set), st.t_lo, st.t_hi});
          }
          result.flowpipes.push_back(
              {static_cast<Index>(i), static_cast<Index>(bi), std::move(pipe)});
          if (static_cast<Index>(next.size()) > opts.max_branches)
            throw BranchLimitError("reach: branch cap exceeded");
        }
      }
    } catch (...) {
      rethrow_at_layer(i);
    }
    branches = std::move(next);
    record.sets = branches;
    record.wall_ms = elapsed_ms(t0);
    result.layers.push_back(std::move(record));
  }
  return result;
}

namespace {

namespace ode = boost::numeric::odeint;
using OdeState = std::vector<double>;

Vec integrate_node(const NodeDynamics& dyn, const Vec& x0, const TimeConfig& tc,
                   const SimOptions& opts, std::vector<std::pair<double, Vec>>* traj) {
  auto sys = [&](const OdeState& x, OdeState& dxdt, double) {
    Vec xv = Eigen::Map<const Vec>(x.data(), static_cast<Index>(x.size()));
    Vec d = dyn.eval(xv);
    dxdt.assign(d.data(), d.data() + d.size());
  };
  OdeState x(x0.data(), x0.data() + x0.size());
  auto stepper = ode::make_dense_output(opts.abs_tol, opts.rel_tol,
                                        ode::runge_kutta_dopri5<OdeState>());
  if (traj) {
    Index refine = std::max<Index>(1, static_cast<Index>(opts.sample_refine));
    Index k = std::max<Index>(1, static_cast<Index>(std::llround(tc.t_f / tc.step)));
    Index total = k * refine;
    double dt = tc.t_f / static_cast<double>(total);
    traj->reserve(static_cast<size_t>(total) + 1);
    ode::integrate_const(stepper, sys, x, 0.0, tc.t_f, dt,
                         [&](const OdeState& s, double t) {
                           traj->emplace_back(
                               t, Eigen::Map<const Vec>(
                                      s.data(), static_cast<Index>(s.size())));
                         });
    // integrate_const may stop one observer call short of t_f; close the gap.
    if (!traj->empty() && traj->back().first < tc.t_f - 1e-12) {
      ode::integrate_adaptive(stepper, sys, x, traj->back().first, tc.t_f,
                              tc.t_f - traj->back().first);
      traj->emplace_back(tc.t_f, Eigen::Map<const Vec>(
                                     x.data(), static_cast<Index>(x.size())));
    }
  } else {
    ode::integrate_adaptive(stepper, sys, x, 0.0, tc.t_f,
                            std::min(tc.step, tc.t_f));
  }
  return Eigen::Map<const Vec>(x.data(), static_cast<Index>(x.size()));
}

}  // namespace

SimResult simulate(const GnodeModel& model, const Vec& x0, const SimOptions& opts) {
  model.validate();
  check_dims(x0.size() == model.input_dim(), "simulate: input dimension mismatch");
  check_finite(x0, "simulate input");

  SimResult res;
  Vec v = x0;
  for (size_t i = 0; i < model.layers.size(); ++i) {
    if (!layer_is_node(model.layers[i])) {
      v = std::get<FcLayer>(model.layers[i]).eval(v);
      continue;
    }
    const auto& nl = std::get<NodeLayer>(model.layers[i]);
    if (opts.record_trajectories) {
      NodeTrace trace;
      trace.layer = static_cast<Index>(i);
      v = integrate_node(nl.dynamics, v, nl.time, opts, &trace.samples);
      res.traces.push_back(std::move(trace));
    } else {
      v = integrate_node(nl.dynamics, v, nl.time, opts, nullptr);
    }
    if (!v.allFinite())
      throw NumericError("simulate: integrator produced non-finite state at layer " +
                         std::to_string(i));
  }
  res.output = std::move(v);
  return res;
}

GnodeModel unroll_nncs(const NncsSpec& spec) {
  // Controller must be pure FC with a consistent chain.
  for (const auto& l : spec.controller.layers)
    if (layer_is_node(l))
      throw DimensionError("unroll_nncs: controller must contain only FC layers");
  for (size_t i = 0; i + 1 < spec.controller.layers.size(); ++i) {
    if (layer_out_dim(spec.controller.layers[i]) !=
        layer_in_dim(spec.controller.layers[i + 1]))
      throw DimensionError("unroll_nncs: controller dimension chain break");
  }
  spec.plant.validate();
  if (spec.control_steps < 1)
    throw DimensionError("unroll_nncs: control_steps must be >= 1");

  const Index n = spec.plant.dim();
  const Index q = static_cast<Index>(spec.feedback.size());
  const Index p = static_cast<Index>(spec.control_slots.size());
  for (Index idx : spec.feedback)
    if (idx < 0 || idx >= n)
      throw DimensionError("unroll_nncs: feedback index out of range");
  for (Index idx : spec.control_slots)
    if (idx < 0 || idx >= n)
      throw DimensionError("unroll_nncs: control slot out of range");
  if (spec.controller.layers.empty())
    throw DimensionError("unroll_nncs: empty controller");
  const auto& first_fc = std::get<FcLayer>(spec.controller.layers.front());
  const auto& last_fc = std::get<FcLayer>(spec.controller.layers.back());
  if (first_fc.in_dim() != q)
    throw DimensionError("unroll_nncs: controller input width != feedback size");
  if (last_fc.out_dim() != p)
    throw DimensionError("unroll_nncs: controller output width != control slots");

  GnodeModel model;
  model.name = spec.controller.name + "+plant_unrolled";
  for (int step = 0; step < spec.control_steps; ++step) {
    // Selector: x -> [x; x[feedback]]
    Mat sel = Mat::Zero(n + q, n);
    sel.topRows(n) = Mat::Identity(n, n);
    for (Index j = 0; j < q; ++j) sel(n + j, spec.feedback[static_cast<size_t>(j)]) = 1.0;
    model.layers.emplace_back(FcLayer(sel, Vec::Zero(n + q), Activation::Linear));

    // Controller layers lifted with an n-wide passthrough block.
    for (const auto& cl : spec.controller.layers) {
      const auto& fc = std::get<FcLayer>(cl);
      Mat W = Mat::Zero(n + fc.out_dim(), n + fc.in_dim());
      W.topLeftCorner(n, n) = Mat::Identity(n, n);
      W.bottomRightCorner(fc.out_dim(), fc.in_dim()) = fc.W;
      Vec b = Vec::Zero(n + fc.out_dim());
      b.tail(fc.out_dim()) = fc.b;
      model.layers.emplace_back(FcLayer(W, b, fc.act, fc.leaky_slope, n));
    }

    // Writeback: [x; u] -> next augmented state with control slots replaced.
    Mat wb = Mat::Zero(n, n + p);
    for (Index i = 0; i < n; ++i) wb(i, i) = 1.0;
    for (Index j = 0; j < p; ++j) {
      Index slot = spec.control_slots[static_cast<size_t>(j)];
      wb.row(slot).setZero();
      wb(slot, n + j) = 1.0;
    }
    model.layers.emplace_back(FcLayer(wb, Vec::Zero(n), Activation::Linear));

    model.layers.emplace_back(NodeLayer{spec.plant, spec.period});
  }
  model.validate();
  return model;
}

}  // namespace gnr
