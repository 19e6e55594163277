#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tdlab/harness.hpp"

#ifndef TDLAB_VERSION
#define TDLAB_VERSION "unknown"
#endif

namespace tdlab {

std::string_view version_string() { return TDLAB_VERSION; }

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::Io, "cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out)
        throw Error(Errc::Io, "write failed for " + path.string());
}

} // namespace

void write_csv(std::ostream& os, const SweepResult& result) {
    const auto& c = result.config;
    os << "experiment,algo," << axis_name(c.axis) << ",run,t,metric,diverged\n";
    for (const auto& cell : result.cells) {
        const std::string prefix = c.id + ',' + cell.algo + ',' + format_g17(cell.axis_value) + ',';
        for (const auto& run : cell.runs)
            for (std::size_t i = 0; i < run.t.size(); ++i) {
                const bool gone = run.truncation_index >= 0 && run.t[i] > run.truncation_index;
                os << prefix << run.run << ',' << run.t[i] << ',' << format_g17(run.metric[i]) << ','
                   << (gone ? 1 : 0) << '\n';
            }
    }
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) {
    auto out = open_output(path);
    write_csv(out, result);
    finish(out, path);
}

void write_plot_script(std::ostream& os, const SweepResult& result, std::string_view csv_name) {
    const auto& c = result.config;
    const bool control = is_control(c.env);
    const std::string metric_label = control ? "Average reward" : "Loss value";
    const std::string axis_label = c.axis == SweepAxis::Beta0 ? "Initial step-size $\\\\beta_0$"
                                                              : "Step-size ratio $c_\\\\alpha$";
    std::vector<std::string> algos;
    for (const auto& cell : result.cells)
        if (std::find(algos.begin(), algos.end(), cell.algo) == algos.end())
            algos.push_back(cell.algo);

    os << "#!/usr/bin/env python3\n"
       << "# " << c.id << ": mean with 95% band per algorithm.\n"
       << "import csv\n"
       << "import math\n"
       << "import os\n"
       << "import sys\n"
       << "from collections import defaultdict\n\n"
       << "import matplotlib\n"
       << "matplotlib.use(\"Agg\")\n"
       << "import matplotlib.pyplot as plt\n\n"
       << "HERE = os.path.dirname(os.path.abspath(__file__))\n"
       << "CSV = os.path.join(HERE, \"" << csv_name << "\")\n"
       << "ALGOS = [";
    for (std::size_t i = 0; i < algos.size(); ++i)
        os << (i ? ", " : "") << '"' << algos[i] << '"';
    os << "]\n"
       << "AXIS = \"" << axis_name(c.axis) << "\"\n"
       << "KIND = \"" << (c.plot == PlotKind::Sweep ? "sweep" : "trajectory") << "\"\n"
       << "LOG_Y = " << (c.log_y ? "True" : "False") << "\n\n"
       << "\n"
       << "def band(values):\n"
       << "    n = len(values)\n"
       << "    mean = sum(values) / n\n"
       << "    if n < 2:\n"
       << "        return mean, 0.0\n"
       << "    # products rather than ** so that huge losses give inf, not OverflowError\n"
       << "    sd = math.sqrt(sum((v - mean) * (v - mean) for v in values) / (n - 1))\n"
       << "    return mean, 1.96 * sd / math.sqrt(n)\n\n"
       << "\n"
       << "def main():\n"
       << "    # (algo, x) -> run -> value; for sweeps x is the grid value and the\n"
       << "    # value is the run's last recorded point\n"
       << "    series = defaultdict(lambda: defaultdict(dict))\n"
       << "    with open(CSV, newline=\"\") as fh:\n"
       << "        for row in csv.DictReader(fh):\n"
       << "            t = int(row[\"t\"])\n"
       << "            metric = float(row[\"metric\"])\n"
       << "            if KIND == \"sweep\":\n"
       << "                grid, run = float(row[AXIS]), int(row[\"run\"])\n"
       << "                prev = series[row[\"algo\"]][grid].get(run)\n"
       << "                if prev is None or prev[0] < t:\n"
       << "                    series[row[\"algo\"]][grid][run] = (t, metric)\n"
       << "            else:\n"
       << "                series[row[\"algo\"]][t][int(row[\"run\"])] = (t, metric)\n\n"
       << "    fig, ax = plt.subplots(figsize=(6, 4))\n"
       << "    for algo in ALGOS:\n"
       << "        xs = sorted(series[algo])\n"
       << "        stats = [band([v for _, v in series[algo][x].values()]) for x in xs]\n"
       << "        mean = [m for m, _ in stats]\n"
       << "        lo = [m - h for m, h in stats]\n"
       << "        hi = [m + h for m, h in stats]\n"
       << "        (line,) = ax.plot(xs, mean, label=algo)\n"
       << "        ax.fill_between(xs, lo, hi, color=line.get_color(), alpha=0.2)\n"
       << "    ax.set_xlabel(\"" << (c.plot == PlotKind::Sweep ? axis_label : std::string("Iteration")) << "\")\n"
       << "    ax.set_ylabel(\"" << metric_label << "\")\n"
       << "    if LOG_Y:\n"
       << "        ax.set_yscale(\"log\")\n"
       << "    ax.set_title(\"" << c.id << "\")\n"
       << "    ax.legend()\n"
       << "    fig.tight_layout()\n"
       << "    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(HERE, \"" << c.id << ".png\")\n"
       << "    fig.savefig(out, dpi=150)\n\n"
       << "\n"
       << "if __name__ == \"__main__\":\n"
       << "    main()\n";
}

void emit_plot_script(const SweepResult& result, const std::filesystem::path& path, std::string_view csv_name) {
    auto out = open_output(path);
    write_plot_script(out, result, csv_name);
    finish(out, path);
}

void write_meta(std::ostream& os, const SweepResult& result, std::string_view preset, bool desk) {
    using nlohmann::ordered_json;
    ordered_json meta;
    meta["preset"] = preset;
    meta["version"] = version_string();
    meta["desk_scale"] = desk;
    meta["config_hash"] = config_hash(result.config);
    meta["config"] = format_config(result.config);
    ordered_json cells = ordered_json::array();
    for (const auto& cell : result.cells) {
        ordered_json j;
        j["algo"] = cell.algo;
        j[std::string(axis_name(result.config.axis))] = cell.axis_value;
        j["mean"] = cell.mean;
        j["sd"] = cell.sd;
        j["ci95"] = cell.ci_half_width;
        j["diverged"] = cell.diverged;
        j["runs"] = cell.runs.size();
        cells.push_back(std::move(j));
    }
    meta["summary"] = std::move(cells);
    os << meta.dump(2) << '\n';
}

void emit_meta(const SweepResult& result, const std::filesystem::path& path, std::string_view preset, bool desk) {
    auto out = open_output(path);
    write_meta(out, result, preset, desk);
    finish(out, path);
}

void emit_all(const SweepResult& result, const std::filesystem::path& dir, std::string_view name, bool desk) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());
    const std::string base(name);
    emit_csv(result, dir / (base + ".csv"));
    emit_plot_script(result, dir / (base + ".plot"), base + ".csv");
    emit_meta(result, dir / (base + ".meta.json"), name, desk);
}

} // namespace tdlab
