#include "nta/distpca.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace nta {

std::optional<UpdateMsg> monitor_step(MonitorState& state, double x) {
    if (state.delta < 0.0) throw std::invalid_argument("monitor_step: delta must be >= 0");
    if (state.primed && std::fabs(x - state.last_sent) <= state.delta) return std::nullopt;
    state.primed = true;
    state.last_sent = x;
    return UpdateMsg{state.index, x};
}

CoordinatorState make_coordinator(std::size_t monitors, std::size_t window_rows, double alpha,
                                  double sigma_mult) {
    if (monitors == 0 || window_rows < 2)
        throw std::invalid_argument("make_coordinator: need monitors >= 1, window >= 2");
    CoordinatorState s;
    s.window_rows = window_rows;
    s.alpha = alpha;
    s.sigma_mult = sigma_mult;
    s.predictions.assign(monitors, 0.0);
    return s;
}

CoordinatorDecision coordinator_step(CoordinatorState& state,
                                     const std::vector<UpdateMsg>& updates) {
    const std::size_t n = state.predictions.size();
    for (const auto& u : updates) {
        if (u.index >= n) throw std::invalid_argument("coordinator_step: bad monitor index");
        state.predictions[u.index] = u.value;
    }
    state.window.push_back(state.predictions);
    if (state.window.size() > state.window_rows) state.window.pop_front();

    CoordinatorDecision d;
    if (state.window.size() < 2) return d;
    d.active = true;

    Mat w(state.window.size(), n);
    for (std::size_t i = 0; i < state.window.size(); ++i)
        for (std::size_t j = 0; j < n; ++j) w(i, j) = state.window[i][j];

    auto nw = normalize_columns(w, false);
    PcaModel model = fit_pca(nw);
    std::size_t k = split_subspace(nw.x, model, state.sigma_mult);
    model.k = std::min(k, n - 1);  // detection needs a residual subspace

    Vec x_hat = normalize_row(model, state.predictions);
    try {
        SpeResult r = spe_detect(x_hat, model, state.alpha);
        d.spe = r.spe;
        d.threshold = r.threshold;
        d.alarm = r.alarm;
    } catch (const std::runtime_error&) {
        // Window with no residual variance (e.g. constant streams): treat as
        // quiet; the centralized reference hits the identical branch.
        d.degenerate = true;
    }
    return d;
}

FilterAllocation delta_from_epsilon(double eigenvalue_mean, std::size_t m, std::size_t n,
                                    double epsilon) {
    if (eigenvalue_mean <= 0.0 || epsilon <= 0.0)
        throw std::invalid_argument("delta_from_epsilon: lambda_bar and epsilon must be positive");
    double md = static_cast<double>(m), nd = static_cast<double>(n);
    double base = 3.0 * eigenvalue_mean * nd;
    double sigma = (std::sqrt(base + 3.0 * epsilon * std::sqrt(md * md + md * nd)) -
                    std::sqrt(base)) /
                   std::sqrt(md + nd);
    return {sigma, sigma * std::sqrt(3.0)};
}

double SimReport::message_ratio(std::size_t monitors) const {
    if (steps.empty() || monitors == 0) return 0.0;
    return static_cast<double>(total_messages) /
           (static_cast<double>(steps.size()) * static_cast<double>(monitors));
}

double SimReport::agreement() const {
    if (active_steps == 0) return 1.0;
    return static_cast<double>(agreement_steps) / static_cast<double>(active_steps);
}

SimReport simulate(const Mat& streams, const Vec& deltas, std::size_t window_rows, double alpha,
                   double sigma_mult) {
    const std::size_t t = streams.rows, n = streams.cols;
    if (deltas.size() != n) throw std::invalid_argument("simulate: deltas size mismatch");

    std::vector<MonitorState> monitors(n);
    for (std::size_t i = 0; i < n; ++i) {
        monitors[i].index = i;
        monitors[i].delta = deltas[i];
    }
    CoordinatorState filtered = make_coordinator(n, window_rows, alpha, sigma_mult);
    CoordinatorState exact = make_coordinator(n, window_rows, alpha, sigma_mult);

    SimReport report;
    for (std::size_t step = 0; step < t; ++step) {
        std::vector<UpdateMsg> updates;
        std::vector<UpdateMsg> all;
        for (std::size_t i = 0; i < n; ++i) {
            double x = streams(step, i);
            all.push_back(UpdateMsg{i, x});
            if (auto msg = monitor_step(monitors[i], x)) updates.push_back(*msg);
        }
        CoordinatorDecision d = coordinator_step(filtered, updates);
        CoordinatorDecision e = coordinator_step(exact, all);

        SimStep s;
        s.step = step;
        s.messages = updates.size();
        s.alarm = d.alarm;
        s.exact_alarm = e.alarm;
        report.steps.push_back(s);
        report.total_messages += updates.size();
        if (d.active && e.active) {
            ++report.active_steps;
            if (d.alarm == e.alarm) ++report.agreement_steps;
        }
    }
    return report;
}

void write_sim_report(std::ostream& out, const SimReport& report) {
    for (const auto& s : report.steps) {
        nlohmann::ordered_json j;
        j["step"] = s.step;
        j["alarms"] = s.alarm ? 1 : 0;
        j["messages"] = s.messages;
        j["exact_alarm"] = s.exact_alarm ? 1 : 0;
        out << j.dump() << '\n';
    }
}

}  // namespace nta
