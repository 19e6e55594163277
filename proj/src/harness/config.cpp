#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "tdlab/harness.hpp"
#include "tdlab/random.hpp"

namespace tdlab {

EnvKind parse_env_kind(std::string_view name) {
    if (name == "mrp")
        return EnvKind::Mrp;
    if (name == "boyan")
        return EnvKind::Boyan;
    if (name == "access")
        return EnvKind::Access;
    if (name == "pendulum")
        return EnvKind::Pendulum;
    throw Error(Errc::InvalidConfig, "unknown env '" + std::string(name) + "'");
}

std::string_view to_string(EnvKind env) {
    switch (env) {
    case EnvKind::Mrp: return "mrp";
    case EnvKind::Boyan: return "boyan";
    case EnvKind::Access: return "access";
    case EnvKind::Pendulum: return "pendulum";
    }
    return "?";
}

std::string_view axis_name(SweepAxis axis) { return axis == SweepAxis::Beta0 ? "beta0" : "c_alpha"; }

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

double to_double(const std::string& v) {
    double x = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(x))
        throw std::invalid_argument("expected a finite number, got '" + v + "'");
    return x;
}

long to_long(const std::string& v) {
    long x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw std::invalid_argument("expected an integer, got '" + v + "'");
    return x;
}

std::uint64_t to_u64(const std::string& v) {
    std::uint64_t x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& v) {
    if (v == "true" || v == "yes" || v == "1")
        return true;
    if (v == "false" || v == "no" || v == "0")
        return false;
    throw std::invalid_argument("expected true or false, got '" + v + "'");
}

// Snaps a + i*step to the nearest 12-significant-digit decimal so that
// 0.1:3.0:0.1 yields 0.3 rather than 0.30000000000000004.
double snap(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return std::strtod(buf, nullptr);
}

std::vector<double> to_grid(const std::string& v) {
    std::vector<double> out;
    if (v.find(':') != std::string::npos) {
        const auto parts = split(v, ':');
        if (parts.size() != 3)
            throw std::invalid_argument("range must be first:last:step, got '" + v + "'");
        const double first = to_double(parts[0]), last = to_double(parts[1]), step = to_double(parts[2]);
        if (!(step > 0.0) || last < first)
            throw std::invalid_argument("range needs step > 0 and last >= first");
        const auto n = static_cast<long>(std::floor((last - first) / step + 1e-9)) + 1;
        for (long i = 0; i < n; ++i)
            out.push_back(snap(first + static_cast<double>(i) * step));
        return out;
    }
    for (const auto& part : split(v, ','))
        if (!part.empty())
            out.push_back(to_double(part));
    return out;
}

ScheduleKind to_schedule_kind(const std::string& v) {
    if (v == "constant")
        return ScheduleKind::Constant;
    if (v == "poly")
        return ScheduleKind::Poly;
    if (v == "offset_poly")
        return ScheduleKind::OffsetPoly;
    throw std::invalid_argument("expected constant, poly or offset_poly, got '" + v + "'");
}

std::string_view schedule_name(ScheduleKind k) {
    switch (k) {
    case ScheduleKind::Constant: return "constant";
    case ScheduleKind::Poly: return "poly";
    case ScheduleKind::OffsetPoly: return "offset_poly";
    }
    return "?";
}

ProjectionMode to_projection_mode(const std::string& v) {
    if (v == "none")
        return ProjectionMode::None;
    if (v == "joint")
        return ProjectionMode::Joint;
    if (v == "separate")
        return ProjectionMode::Separate;
    throw std::invalid_argument("expected none, joint or separate, got '" + v + "'");
}

std::string_view projection_name(ProjectionMode m) {
    switch (m) {
    case ProjectionMode::None: return "none";
    case ProjectionMode::Joint: return "joint";
    case ProjectionMode::Separate: return "separate";
    }
    return "?";
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table{
        {"experiment.id", [](auto& c, const auto& v) { c.id = v; }},
        {"experiment.runs", [](auto& c, const auto& v) { c.runs = to_long(v); }},
        {"experiment.steps", [](auto& c, const auto& v) { c.steps = to_long(v); }},
        {"experiment.seed", [](auto& c, const auto& v) { c.seed = to_u64(v); }},
        {"experiment.record_every", [](auto& c, const auto& v) { c.record_every = to_long(v); }},
        {"experiment.reduction",
         [](auto& c, const auto& v) {
             try {
                 c.reduction = parse_reduction(v);
             } catch (const Error&) {
                 throw std::invalid_argument("expected final, tail or mean, got '" + v + "'");
             }
         }},
        {"experiment.tail", [](auto& c, const auto& v) { c.tail = to_long(v); }},
        {"experiment.plot",
         [](auto& c, const auto& v) {
             if (v == "sweep")
                 c.plot = PlotKind::Sweep;
             else if (v == "trajectory")
                 c.plot = PlotKind::Trajectory;
             else
                 throw std::invalid_argument("expected sweep or trajectory, got '" + v + "'");
         }},
        {"experiment.log_y", [](auto& c, const auto& v) { c.log_y = to_bool(v); }},
        {"env.kind",
         [](auto& c, const auto& v) {
             try {
                 c.env = parse_env_kind(v);
             } catch (const Error&) {
                 throw std::invalid_argument("expected mrp, boyan, access or pendulum, got '" + v + "'");
             }
         }},
        {"env.n_states", [](auto& c, const auto& v) { c.n_states = to_long(v); }},
        {"env.features", [](auto& c, const auto& v) { c.features = to_long(v); }},
        {"env.shared", [](auto& c, const auto& v) { c.shared_env = to_bool(v); }},
        {"learner.algos",
         [](auto& c, const auto& v) {
             c.algos.clear();
             for (auto& a : split(v, ','))
                 if (!a.empty())
                     c.algos.push_back(a);
         }},
        {"learner.lambda", [](auto& c, const auto& v) { c.lambda = to_double(v); }},
        {"learner.c_alpha", [](auto& c, const auto& v) { c.c_alpha = to_double(v); }},
        {"learner.epsilon",
         [](auto& c, const auto& v) {
             if (v == "schedule")
                 c.epsilon.reset();
             else
                 c.epsilon = to_double(v);
         }},
        {"schedule.kind", [](auto& c, const auto& v) { c.schedule.kind = to_schedule_kind(v); }},
        {"schedule.beta0", [](auto& c, const auto& v) { c.schedule.beta0 = to_double(v); }},
        {"schedule.s", [](auto& c, const auto& v) { c.schedule.s = to_double(v); }},
        {"schedule.hold", [](auto& c, const auto& v) { c.schedule.hold = to_long(v); }},
        {"schedule.offset", [](auto& c, const auto& v) { c.schedule.offset = to_long(v); }},
        {"sweep.axis",
         [](auto& c, const auto& v) {
             if (v == "beta0")
                 c.axis = SweepAxis::Beta0;
             else if (v == "c_alpha")
                 c.axis = SweepAxis::CAlpha;
             else
                 throw std::invalid_argument("expected beta0 or c_alpha, got '" + v + "'");
         }},
        {"sweep.grid", [](auto& c, const auto& v) { c.grid = to_grid(v); }},
        {"sweep.beta0_scale", [](auto& c, const auto& v) { c.beta0_scale = to_double(v); }},
        {"projection.mode", [](auto& c, const auto& v) { c.projection.mode = to_projection_mode(v); }},
        {"projection.r_theta", [](auto& c, const auto& v) { c.projection.r_theta = to_double(v); }},
        {"projection.r_omega", [](auto& c, const auto& v) { c.projection.r_omega = to_double(v); }},
    };
    return table;
}

std::string join_errors(const std::vector<std::string>& errors) {
    std::string msg;
    for (const auto& e : errors) {
        if (!msg.empty())
            msg += "; ";
        msg += e;
    }
    return msg;
}

} // namespace

AlgoSpec parse_algo_spec(std::string_view token, const ProjectionConfig& base) {
    AlgoSpec spec;
    spec.label = std::string(token);
    const auto colon = token.find(':');
    const std::string_view name = token.substr(0, colon);
    spec.algo = parse_algorithm(name);
    if (spec.algo == Algorithm::ImplicitProjected) {
        spec.projection = base;
        if (spec.projection.mode == ProjectionMode::None)
            spec.projection.mode = ProjectionMode::Separate;
        if (colon != std::string_view::npos) {
            const std::string radius = trim(token.substr(colon + 1));
            try {
                spec.projection.r_theta = to_double(radius);
            } catch (const std::invalid_argument&) {
                throw Error(Errc::InvalidConfig, "bad projection radius in '" + spec.label + "'");
            }
        }
        spec.projection.validate();
    } else if (colon != std::string_view::npos) {
        throw Error(Errc::InvalidConfig, "only implicit-proj takes a radius: '" + spec.label + "'");
    }
    return spec;
}

std::vector<AlgoSpec> ExperimentConfig::algo_specs() const {
    std::vector<AlgoSpec> out;
    for (const auto& a : algos)
        out.push_back(parse_algo_spec(a, projection));
    return out;
}

void ExperimentConfig::validate() const {
    std::vector<std::string> errors;
    auto check = [&](bool ok, std::string_view key, std::string_view what) {
        if (!ok)
            errors.push_back(std::string(key) + ": " + std::string(what));
    };
    check(!id.empty() && id.find_first_of(",\n\r\"") == std::string::npos, "experiment.id",
          "must be non-empty without commas, quotes or newlines");
    check(runs >= 1, "experiment.runs", "must be >= 1");
    check(steps >= 0, "experiment.steps", "must be >= 0");
    check(record_every >= 1, "experiment.record_every", "must be >= 1");
    check(tail >= 1, "experiment.tail", "must be >= 1");
    if (env == EnvKind::Mrp) {
        check(n_states >= 2, "env.n_states", "must be >= 2");
        check(features >= 3 && features <= n_states, "env.features", "must be in [3, n_states]");
    }
    check(!algos.empty(), "learner.algos", "must list at least one algorithm");
    for (const auto& a : algos) {
        try {
            parse_algo_spec(a, projection);
        } catch (const Error& e) {
            errors.push_back("learner.algos: " + std::string(e.what()));
        }
    }
    check(lambda >= 0.0 && lambda < 1.0, "learner.lambda", "must be in [0, 1)");
    check(c_alpha > 0.0, "learner.c_alpha", "must be > 0");
    check(!epsilon || (*epsilon >= 0.0 && *epsilon <= 1.0), "learner.epsilon", "must be in [0, 1] or 'schedule'");
    check(schedule.beta0 > 0.0, "schedule.beta0", "must be > 0");
    check(schedule.kind == ScheduleKind::Constant || schedule.s > 0.0, "schedule.s", "must be > 0");
    check(schedule.hold >= 0, "schedule.hold", "must be >= 0");
    check(schedule.kind != ScheduleKind::OffsetPoly || schedule.offset >= 1, "schedule.offset", "must be >= 1");
    check(!grid.empty(), "sweep.grid", "must be non-empty");
    for (double g : grid)
        check(g > 0.0, "sweep.grid", "values must be > 0");
    check(beta0_scale > 0.0, "sweep.beta0_scale", "must be > 0");
    check(projection.r_theta > 0.0, "projection.r_theta", "must be > 0");
    check(projection.r_omega > 0.0, "projection.r_omega", "must be > 0");
    if (!errors.empty())
        throw Error(Errc::InvalidConfig, join_errors(errors));
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig config;
    std::vector<std::string> errors;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const std::string text = trim(line);
        if (text.empty())
            continue;
        if (text.front() == '[') {
            if (text.back() != ']') {
                errors.push_back("line " + std::to_string(lineno) + ": unterminated section header");
                continue;
            }
            section = trim(std::string_view(text).substr(1, text.size() - 2));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        const std::string name = trim(std::string_view(text).substr(0, eq));
        const std::string key = section.empty() ? name : section + "." + name;
        const std::string value = trim(std::string_view(text).substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            errors.push_back(key + ": unknown key");
            continue;
        }
        try {
            it->second(config, value);
        } catch (const std::invalid_argument& e) {
            errors.push_back(key + ": " + e.what());
        }
    }
    if (!errors.empty())
        throw Error(Errc::InvalidConfig, join_errors(errors));
    config.validate();
    return config;
}

ExperimentConfig parse_config_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_config(in);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::Io, "cannot read config " + path.string());
    return parse_config(in);
}

std::string format_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[experiment]\n"
       << "id = " << c.id << '\n'
       << "runs = " << c.runs << '\n'
       << "steps = " << c.steps << '\n'
       << "seed = " << c.seed << '\n'
       << "record_every = " << c.record_every << '\n'
       << "reduction = " << to_string(c.reduction) << '\n'
       << "tail = " << c.tail << '\n'
       << "plot = " << (c.plot == PlotKind::Sweep ? "sweep" : "trajectory") << '\n'
       << "log_y = " << (c.log_y ? "true" : "false") << '\n'
       << "\n[env]\n"
       << "kind = " << to_string(c.env) << '\n'
       << "n_states = " << c.n_states << '\n'
       << "features = " << c.features << '\n'
       << "shared = " << (c.shared_env ? "true" : "false") << '\n'
       << "\n[learner]\n"
       << "algos = ";
    for (std::size_t i = 0; i < c.algos.size(); ++i)
        os << (i ? ", " : "") << c.algos[i];
    os << '\n'
       << "lambda = " << format_double(c.lambda) << '\n'
       << "c_alpha = " << format_double(c.c_alpha) << '\n'
       << "epsilon = " << (c.epsilon ? format_double(*c.epsilon) : std::string("schedule")) << '\n'
       << "\n[schedule]\n"
       << "kind = " << schedule_name(c.schedule.kind) << '\n'
       << "beta0 = " << format_double(c.schedule.beta0) << '\n'
       << "s = " << format_double(c.schedule.s) << '\n'
       << "hold = " << c.schedule.hold << '\n'
       << "offset = " << c.schedule.offset << '\n'
       << "\n[sweep]\n"
       << "axis = " << axis_name(c.axis) << '\n'
       << "grid = ";
    for (std::size_t i = 0; i < c.grid.size(); ++i)
        os << (i ? ", " : "") << format_double(c.grid[i]);
    os << '\n'
       << "beta0_scale = " << format_double(c.beta0_scale) << '\n'
       << "\n[projection]\n"
       << "mode = " << projection_name(c.projection.mode) << '\n'
       << "r_theta = " << format_double(c.projection.r_theta) << '\n'
       << "r_omega = " << format_double(c.projection.r_omega) << '\n';
    return os.str();
}

std::string config_hash(const ExperimentConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(text_hash(format_config(config))));
    return buf;
}

} // namespace tdlab
