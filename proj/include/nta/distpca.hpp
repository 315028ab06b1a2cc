#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <ostream>
#include <vector>

#include "nta/mat.hpp"
#include "nta/pca.hpp"

namespace nta {

// One monitored stream with its local filter. The monitor stays quiet while
// the coordinator's last-value prediction is within delta of the truth.
struct MonitorState {
    std::size_t index = 0;
    double delta = 0.0;
    double last_sent = 0.0;
    bool primed = false;  // first sample is always sent
};

struct UpdateMsg {
    std::size_t index = 0;
    double value = 0.0;
};

std::optional<UpdateMsg> monitor_step(MonitorState& state, double x);

struct CoordinatorState {
    std::size_t window_rows = 0;      // m
    double alpha = 0.05;
    double sigma_mult = 3.0;
    Vec predictions;                  // y_i per monitor
    std::deque<Vec> window;           // most recent window_rows rows of X-hat
};

CoordinatorState make_coordinator(std::size_t monitors, std::size_t window_rows, double alpha,
                                  double sigma_mult = 3.0);

struct CoordinatorDecision {
    bool active = false;      // window large enough for detection
    bool alarm = false;
    double spe = 0.0;
    double threshold = 0.0;
    bool degenerate = false;  // residual subspace empty this round
};

CoordinatorDecision coordinator_step(CoordinatorState& state,
                                     const std::vector<UpdateMsg>& updates);

struct FilterAllocation {
    double sigma = 0.0;
    double delta = 0.0;
};

// Homogeneous filter width from a tolerable mean eigen-error epsilon.
FilterAllocation delta_from_epsilon(double eigenvalue_mean, std::size_t m, std::size_t n,
                                    double epsilon);

struct SimStep {
    std::size_t step = 0;
    bool alarm = false;
    std::size_t messages = 0;
    bool exact_alarm = false;
};

struct SimReport {
    std::vector<SimStep> steps;
    std::size_t total_messages = 0;
    std::size_t active_steps = 0;     // steps where both schemes could decide
    std::size_t agreement_steps = 0;

    double message_ratio(std::size_t monitors) const;
    double agreement() const;
};

// Lockstep run of monitors + coordinator against a centralized reference that
// sees the unfiltered rows. streams: time x monitors.
SimReport simulate(const Mat& streams, const Vec& deltas, std::size_t window_rows, double alpha,
                   double sigma_mult = 3.0);

void write_sim_report(std::ostream& out, const SimReport& report);

}  // namespace nta
