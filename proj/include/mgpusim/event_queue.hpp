#pragma once

// Deterministic discrete-event kernel. A single queue orders every event in
// the system lexicographically by (time, seq); seq is a global counter handed
// out in scheduling order, so simultaneous events pop in the order they were
// scheduled.

#include <cstdint>
#include <functional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "mgpusim/error.hpp"
#include "mgpusim/sim_time.hpp"

namespace mgpusim {

struct ComponentId {
  std::uint32_t value = 0;
  friend constexpr bool operator==(ComponentId, ComponentId) = default;
};

struct Event {
  SimTime time;
  std::uint64_t seq = 0;
  ComponentId target;
  std::uint32_t kind = 0;  // handler-defined event kind
  std::uint64_t ref = 0;   // handler-defined request reference

  friend constexpr bool operator==(const Event&, const Event&) = default;
};

constexpr bool fires_before(const Event& a, const Event& b) {
  return a.time != b.time ? a.time < b.time : a.seq < b.seq;
}

class EventQueue {
 public:
  void schedule(const Event& e) {
    if (e.time < now_) {
      fail(ErrorCategory::Integrity, "event scheduled in the past: t=" +
                                         std::to_string(e.time.count()) + "ps < now=" +
                                         std::to_string(now_.count()) + "ps");
    }
    heap_.push(e);
    ++scheduled_;
  }

  /// Removes and returns the earliest event; advances the clock to its time.
  Event pop() {
    if (heap_.empty()) fail(ErrorCategory::Integrity, "pop from empty event queue");
    Event e = heap_.top();
    heap_.pop();
    now_ = e.time;
    ++popped_;
    return e;
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  SimTime now() const { return now_; }
  std::uint64_t scheduled_count() const { return scheduled_; }
  std::uint64_t popped_count() const { return popped_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const { return fires_before(b, a); }
  };

  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  SimTime now_{};
  std::uint64_t scheduled_ = 0;
  std::uint64_t popped_ = 0;
};

/// Event queue plus handler dispatch. Sequence numbers are assigned here.
class EventKernel {
 public:
  using Handler = std::function<void(const Event&)>;

  ComponentId add_component(std::string name, Handler h = {}) {
    ComponentId id{static_cast<std::uint32_t>(names_.size())};
    names_.push_back(std::move(name));
    handlers_.push_back(std::move(h));
    return id;
  }

  void set_handler(ComponentId id, Handler h) {
    check_known(id);
    handlers_[id.value] = std::move(h);
  }

  const std::string& name(ComponentId id) const {
    check_known(id);
    return names_[id.value];
  }

  std::uint64_t schedule(SimTime t, ComponentId target, std::uint32_t kind = 0,
                         std::uint64_t ref = 0) {
    Event e{t, next_seq_, target, kind, ref};
    queue_.schedule(e);
    return next_seq_++;
  }

  /// Pops and dispatches events until the queue drains. Returns the time of
  /// the last processed event, or zero when nothing was scheduled.
  SimTime run_to_completion() {
    SimTime last{};
    while (!queue_.empty()) {
      Event e = queue_.pop();
      if (e.target.value >= handlers_.size() || !handlers_[e.target.value]) {
        const std::string who = e.target.value < names_.size()
                                    ? names_[e.target.value]
                                    : "#" + std::to_string(e.target.value);
        fail(ErrorCategory::Integrity, "event targets unregistered component '" + who + "'");
      }
      if (observer_) observer_(e);
      last = e.time;
      handlers_[e.target.value](e);
    }
    return last;
  }

  /// Called for every popped event before dispatch.
  void set_observer(std::function<void(const Event&)> f) { observer_ = std::move(f); }

  SimTime now() const { return queue_.now(); }
  const EventQueue& queue() const { return queue_; }

 private:
  void check_known(ComponentId id) const {
    if (id.value >= names_.size())
      fail(ErrorCategory::Integrity, "unknown component #" + std::to_string(id.value));
  }

  EventQueue queue_;
  std::vector<std::string> names_;
  std::vector<Handler> handlers_;
  std::function<void(const Event&)> observer_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace mgpusim
