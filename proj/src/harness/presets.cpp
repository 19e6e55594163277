#include <cmath>

#include "tdlab/harness.hpp"

namespace tdlab {

namespace {

const std::vector<std::string> kEvaluationAlgos{"standard", "implicit", "implicit-proj:1000", "implicit-proj:5000"};
const std::vector<std::string> kControlAlgos{"standard", "implicit", "implicit-proj:5000"};

std::vector<double> range(double first, double last, double step) {
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((last - first) / step + 1e-9)) + 1;
    for (long i = 0; i < n; ++i)
        out.push_back(std::round((first + static_cast<double>(i) * step) * 1e9) / 1e9);
    return out;
}

std::vector<double> calpha_grid() {
    std::vector<double> out{0.01, 0.05, 0.1};
    for (double c : range(0.125, 1.5, 0.125))
        out.push_back(c);
    return out;
}

ExperimentConfig evaluation(std::string id, EnvKind env, ScheduleKind kind, std::vector<double> grid) {
    ExperimentConfig c;
    c.id = std::move(id);
    c.env = env;
    c.shared_env = env == EnvKind::Mrp;
    c.runs = 50;
    c.steps = 2000;
    c.algos = kEvaluationAlgos;
    c.schedule.kind = kind;
    if (kind != ScheduleKind::Constant) {
        c.schedule.s = 0.99;
        c.schedule.hold = 150;
    }
    c.grid = std::move(grid);
    c.log_y = true;
    return c;
}

ExperimentConfig sweep(std::string id, EnvKind env, ScheduleKind kind, std::vector<double> grid) {
    ExperimentConfig c = evaluation(std::move(id), env, kind, std::move(grid));
    c.plot = PlotKind::Sweep;
    c.record_every = c.steps;
    return c;
}

ExperimentConfig trajectory(std::string id, EnvKind env, ScheduleKind kind, double beta0) {
    ExperimentConfig c = evaluation(std::move(id), env, kind, {beta0});
    c.plot = PlotKind::Trajectory;
    c.record_every = 1;
    return c;
}

ExperimentConfig control(std::string id, EnvKind env) {
    ExperimentConfig c;
    c.id = std::move(id);
    c.env = env;
    c.shared_env = false;
    c.runs = 30;
    c.steps = 15000;
    c.record_every = c.steps;
    c.reduction = Reduction::Final;
    c.plot = PlotKind::Sweep;
    c.algos = kControlAlgos;
    c.schedule = StepSchedule{ScheduleKind::OffsetPoly, 400.0, 0.99, 150, 400, 1.0};
    c.grid = range(0.25, 1.5, 0.25);
    c.beta0_scale = 400.0;
    c.projection = ProjectionConfig{ProjectionMode::Separate, 5000.0, 1.0};
    return c;
}

ExperimentConfig calpha(std::string id, EnvKind env) {
    ExperimentConfig c = sweep(std::move(id), env, ScheduleKind::Poly, calpha_grid());
    c.axis = SweepAxis::CAlpha;
    c.schedule.beta0 = 1.0;
    return c;
}

} // namespace

std::vector<ExperimentConfig> figure_presets() {
    std::vector<ExperimentConfig> out;
    ExperimentConfig sensitivity = sweep("fig1-sensitivity", EnvKind::Mrp, ScheduleKind::Constant, range(0.1, 2.0, 0.1));
    sensitivity.algos = {"standard"};
    out.push_back(sensitivity);
    ExperimentConfig oscillation = trajectory("fig1-trajectory", EnvKind::Mrp, ScheduleKind::Constant, 1.8);
    oscillation.algos = {"standard"};
    out.push_back(oscillation);

    out.push_back(sweep("fig2-mrp-constant", EnvKind::Mrp, ScheduleKind::Constant, range(0.1, 3.0, 0.1)));
    out.push_back(trajectory("fig2-mrp-trajectory", EnvKind::Mrp, ScheduleKind::Constant, 1.0));
    out.push_back(sweep("fig3-boyan-decay", EnvKind::Boyan, ScheduleKind::Poly, range(0.1, 3.0, 0.1)));
    out.push_back(trajectory("fig3-boyan-trajectory", EnvKind::Boyan, ScheduleKind::Poly, 1.5));
    out.push_back(control("fig4-control", EnvKind::Access));
    out.push_back(control("fig4-pendulum", EnvKind::Pendulum));

    out.push_back(sweep("appendix-mrp-decay", EnvKind::Mrp, ScheduleKind::Poly, range(0.1, 3.0, 0.1)));
    out.push_back(trajectory("appendix-mrp-decay-trajectory", EnvKind::Mrp, ScheduleKind::Poly, 1.8));
    out.push_back(sweep("appendix-boyan-constant", EnvKind::Boyan, ScheduleKind::Constant, range(0.1, 3.0, 0.1)));
    out.push_back(trajectory("appendix-boyan-constant-trajectory", EnvKind::Boyan, ScheduleKind::Constant, 0.5));
    out.push_back(calpha("calpha-mrp", EnvKind::Mrp));
    out.push_back(calpha("calpha-boyan", EnvKind::Boyan));
    return out;
}

ExperimentConfig find_preset(std::string_view name) {
    for (auto& p : figure_presets())
        if (p.id == name)
            return p;
    throw Error(Errc::UnknownPreset, "no preset named '" + std::string(name) + "'");
}

ExperimentConfig desk_scale(ExperimentConfig config) {
    config.runs = std::max(1L, config.runs / 2);
    if (config.grid.size() > 2) {
        std::vector<double> thinned;
        for (std::size_t i = 0; i < config.grid.size(); i += 2)
            thinned.push_back(config.grid[i]);
        if (thinned.back() != config.grid.back())
            thinned.push_back(config.grid.back());
        config.grid = std::move(thinned);
    }
    return config;
}

} // namespace tdlab
