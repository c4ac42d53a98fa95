#include "pdmp/path.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace pdmp {

std::size_t PathSkeleton::count(EventKind k) const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(),
                    [k](const PathEvent& e) { return e.kind == k; }));
}

PhasePoint eval_path(const PathSkeleton& path, double t) {
  if (t < path.t0 || t > path.t_end()) {
    throw std::invalid_argument("eval_path: t outside [t0, t0 + horizon]");
  }
  // Latest event with time <= t; the segment base is its post-event state.
  const auto it = std::upper_bound(
      path.events.begin(), path.events.end(), t,
      [](double tt, const PathEvent& e) { return tt < e.time; });
  double t_base = path.t0;
  const PhasePoint* z_base = &path.z0;
  if (it != path.events.begin()) {
    const PathEvent& e = *(it - 1);
    t_base = e.time;
    z_base = &e.after;
  }
  const double dt = t - t_base;
  if (dt == 0.0) return *z_base;

  if (std::holds_alternative<LinearDynamics>(path.dynamics)) {
    PhasePoint z = *z_base;
    z.x += dt * z.v;
    return z;
  }
  const auto& fd = std::get<FlowDynamics>(path.dynamics);
  return hamiltonian_flow(*fd.potential, *z_base, dt, fd.flow);
}

void SkeletonBuilder::on_start(double t0, const PhasePoint& z0) {
  path_ = PathSkeleton{};
  path_.t0 = t0;
  path_.z0 = z0;
  path_.dynamics = dynamics_;
}

void SkeletonBuilder::on_event(double t, EventKind kind, const PhasePoint& z) {
  path_.events.push_back(PathEvent{t, kind, z});
}

void SkeletonBuilder::on_finish(double t_end, const PhasePoint&) {
  path_.horizon = t_end - path_.t0;
}

PathSkeleton SkeletonBuilder::take() { return std::move(path_); }

std::string format_full(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.16e", x);
  return buf;
}

namespace {

void write_header(std::ostream& out, const EventLogHeader& h) {
  out << h.d << ", " << format_full(h.lambda_ref) << ", " << format_full(h.alpha)
      << ", " << format_full(h.horizon) << ", " << h.seed << ", " << h.stream;
  if (!h.flow.empty()) out << ", " << h.flow;
  out << "\n";
}

void write_state(std::ostream& out, double t, const char* kind, const PhasePoint& z) {
  out << format_full(t) << ' ' << kind;
  for (Eigen::Index i = 0; i < z.x.size(); ++i) out << ' ' << format_full(z.x[i]);
  for (Eigen::Index i = 0; i < z.v.size(); ++i) out << ' ' << format_full(z.v[i]);
  out << '\n';
}

}  // namespace

EventLogWriter::EventLogWriter(std::ostream& out, EventLogHeader header)
    : out_(out), header_(std::move(header)) {}

void EventLogWriter::on_start(double t0, const PhasePoint& z0) {
  write_header(out_, header_);
  write_state(out_, t0, "Init", z0);
}

void EventLogWriter::on_event(double t, EventKind kind, const PhasePoint& z) {
  write_state(out_, t, event_kind_name(kind), z);
  ++n_events_;
}

void EventLogWriter::on_finish(double, const PhasePoint&) { out_.flush(); }

void write_event_log(std::ostream& out, const EventLogHeader& header,
                     const PathSkeleton& path) {
  EventLogHeader h = header;
  h.d = path.dim();
  h.horizon = path.horizon;
  write_header(out, h);
  write_state(out, path.t0, "Init", path.z0);
  for (const PathEvent& e : path.events) {
    write_state(out, e.time, event_kind_name(e.kind), e.after);
  }
}

}  // namespace pdmp
