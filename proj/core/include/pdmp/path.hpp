#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "pdmp/flow.hpp"
#include "pdmp/phase.hpp"

namespace pdmp {

enum class EventKind { Bounce, Refresh };

inline const char* event_kind_name(EventKind k) {
  return k == EventKind::Bounce ? "Bounce" : "Refresh";
}

struct PathEvent {
  double time;
  EventKind kind;
  PhasePoint after;  // state immediately after the jump
};

struct LinearDynamics {};

struct FlowDynamics {
  FlowSpec flow;
  std::shared_ptr<const Potential> potential;
};

using Dynamics = std::variant<LinearDynamics, FlowDynamics>;

/// An exact, evaluable continuous-time trajectory: the initial state, the
/// ordered jump events with their post-jump states, and the deterministic
/// motion followed between jumps.
struct PathSkeleton {
  double t0 = 0.0;
  PhasePoint z0;
  std::vector<PathEvent> events;
  Dynamics dynamics = LinearDynamics{};
  double horizon = 0.0;

  Eigen::Index dim() const { return z0.dim(); }
  double t_end() const { return t0 + horizon; }
  std::size_t count(EventKind k) const;
};

/// State at time t in [t0, t0 + horizon]. At an event time this is the
/// stored post-event state.
PhasePoint eval_path(const PathSkeleton& path, double t);

/// Receives a simulation as it is generated; allows event-budget runs at
/// dimensions where storing every post-event state would be prohibitive.
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void on_start(double /*t0*/, const PhasePoint& /*z0*/) {}
  virtual void on_event(double /*t*/, EventKind /*kind*/, const PhasePoint& /*z*/) {}
  virtual void on_finish(double /*t_end*/, const PhasePoint& /*z_end*/) {}
};

class SkeletonBuilder final : public EventSink {
 public:
  explicit SkeletonBuilder(Dynamics dynamics) : dynamics_(std::move(dynamics)) {}
  void on_start(double t0, const PhasePoint& z0) override;
  void on_event(double t, EventKind kind, const PhasePoint& z) override;
  void on_finish(double t_end, const PhasePoint& z_end) override;
  PathSkeleton take();

 private:
  Dynamics dynamics_;
  PathSkeleton path_;
};

/// Line-oriented event log. First line:
///   d, lambda_ref, alpha, horizon, seed, stream[, flow]
/// second line the initial state (`0 Init x v`), then one record per event:
///   time kind x[0..d) v[0..d)
/// all reals in decimal with 17 significant digits.
struct EventLogHeader {
  Eigen::Index d = 0;
  double lambda_ref = 0.0;
  double alpha = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string flow;  // empty for linear dynamics
};

class EventLogWriter final : public EventSink {
 public:
  EventLogWriter(std::ostream& out, EventLogHeader header);
  void on_start(double t0, const PhasePoint& z0) override;
  void on_event(double t, EventKind kind, const PhasePoint& z) override;
  void on_finish(double t_end, const PhasePoint& z_end) override;
  std::size_t events_written() const { return n_events_; }

 private:
  void write_record(double t, const char* kind, const PhasePoint& z);
  std::ostream& out_;
  EventLogHeader header_;
  std::size_t n_events_ = 0;
};

void write_event_log(std::ostream& out, const EventLogHeader& header,
                     const PathSkeleton& path);

/// Format a double with 17 significant digits (round-trip exact).
std::string format_full(double x);

}  // namespace pdmp
