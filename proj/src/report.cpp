#include <algorithm>
#include <fstream>
#include <sstream>

#include "isslab/csv.hpp"
#include "isslab/errors.hpp"
#include "isslab/experiments.hpp"
#include "scenario_support.hpp"

namespace isslab::experiments {

std::vector<std::string> write_bound_report(const std::filesystem::path& dir, const BoundReport& report) {
    if (report.name.empty()) throw PreconditionError("bound report needs a name");
    std::filesystem::create_directories(dir);
    const std::string data_name = report.name + ".csv";
    const std::string meta_name = report.name + ".meta.csv";
    {
        std::ofstream os(dir / data_name, std::ios::binary);
        if (!os) throw Error("cannot write " + (dir / data_name).string());
        csv::Writer w(os);
        w.row({"trajectory", "step", "t", "realized", "bound", "allowed", "blow_up", "violated"});
        for (const auto& r : report.rows) {
            w.field(r.trajectory).field(r.step).field(r.t).field(r.realized).field(r.bound).field(r.allowed);
            w.field(r.blow_up).field(r.violated());
            w.end_row();
        }
    }
    {
        std::ofstream os(dir / meta_name, std::ios::binary);
        if (!os) throw Error("cannot write " + (dir / meta_name).string());
        csv::Writer w(os);
        w.row({"key", "value"});
        w.row({"name", report.name});
        w.row({"data", data_name});
        w.row({"classification", std::string(to_string(report.classification))});
        w.row({"trajectories", std::to_string(report.trajectories)});
        w.row({"steps", std::to_string(report.steps)});
        w.row({"violations", std::to_string(report.violations)});
        w.row({"blow_ups", std::to_string(report.blow_ups)});
        w.row({"worst_ratio", csv::number(report.worst_ratio)});
        for (const auto& [k, v] : report.metadata) w.row({k, v});
    }
    return {data_name, meta_name};
}

namespace {

std::string meta_value(const csv::Table& t, std::string_view key) {
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i].size() >= 2 && t[i][0] == key) return t[i][1];
    throw Error("meta file lacks key '" + std::string(key) + "'");
}

}  // namespace

std::vector<RecheckResult> recheck_reports(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw PreconditionError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> metas;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && name.size() > 9 && name.ends_with(".meta.csv")) metas.push_back(e.path());
    }
    std::sort(metas.begin(), metas.end());

    std::vector<RecheckResult> out;
    for (const auto& m : metas) {
        const auto meta = csv::read_file(m.string());
        const auto data = csv::read_file((m.parent_path() / meta_value(meta, "data")).string());
        if (data.empty()) throw Error("empty bound report " + m.string());
        const auto c_realized = csv::column(data, "realized");
        const auto c_allowed = csv::column(data, "allowed");
        const auto c_blow = csv::column(data, "blow_up");
        std::vector<BoundRow> rows;
        for (std::size_t i = 1; i < data.size(); ++i) {
            BoundRow r;
            r.realized = csv::parse_number(data[i].at(c_realized));
            r.allowed = csv::parse_number(data[i].at(c_allowed));
            r.blow_up = data[i].at(c_blow) == "true";
            rows.push_back(r);
        }
        RecheckResult res;
        res.file = std::filesystem::relative(m, dir).generic_string();
        res.recorded = parse_classification(meta_value(meta, "classification"));
        res.recomputed = classify_rows(rows);
        out.push_back(res);
    }
    return out;
}

namespace detail {

std::filesystem::path write_summary(const RunOptions& opts, const std::vector<ScenarioResult>& results) {
    std::filesystem::create_directories(opts.out_dir);
    const auto path = opts.out_dir / "summary.md";
    std::ofstream md(path, std::ios::binary);
    if (!md) throw Error("cannot write " + path.string());

    md << "# Run summary\n\n";
    md << "seed: " << opts.config.seed << "\n\n";
    md << "| scenario | status | checks | seconds |\n|---|---|---|---|\n";
    for (const auto& r : results) {
        const auto ok = std::count_if(r.checks.begin(), r.checks.end(), [](const Check& c) { return c.passed; });
        md << "| " << r.name << " | " << (r.passed ? "PASS" : (r.error.empty() ? "FAIL" : "ERROR")) << " | " << ok
           << "/" << r.checks.size() << " | " << fmt(r.seconds, 3) << " |\n";
    }
    for (const auto& r : results) {
        md << "\n## " << r.name << "\n\n";
        if (!r.error.empty()) md << "error: " << r.error << "\n\n";
        for (const auto& c : r.checks)
            md << "- [" << (c.passed ? "x" : " ") << "] " << c.name << ": " << c.detail << "\n";
        if (!r.warnings.empty()) {
            md << "\nwarnings:\n\n";
            for (const auto& w : r.warnings) md << "- " << w << "\n";
        }
        if (!r.notes.empty()) {
            md << "\nnotes:\n\n";
            for (const auto& n : r.notes) md << "- " << n << "\n";
        }
        if (!r.files.empty()) {
            md << "\nfiles:\n\n";
            for (const auto& f : r.files) md << "- " << f << "\n";
        }
    }

    // One panel per bound report: realized norm against the allowed bound on
    // the first trajectory.
    std::ofstream gp(opts.out_dir / "plots.gp", std::ios::binary);
    if (!gp) throw Error("cannot write plots.gp");
    gp << "# gnuplot -persist plots.gp   (run from the results directory)\n";
    gp << "set datafile separator ','\nset key left top\nset xlabel 't'\n";
    gp << "set terminal pngcairo size 900,600\n";
    for (const auto& r : results) {
        for (const auto& f : r.files) {
            if (!f.ends_with(".csv") || f.ends_with(".meta.csv")) continue;
            std::ifstream probe(opts.out_dir / f);
            std::string header;
            std::getline(probe, header);
            std::string stem = f.substr(0, f.size() - 4);
            std::replace(stem.begin(), stem.end(), '/', '_');
            if (header.starts_with("trajectory,step,t,realized,bound,allowed")) {
                gp << "set output '" << stem << ".png'\nset title '" << f << "'\nset logscale y\n";
                gp << "plot '" << f << "' every ::1 using ($1==0?$3:1/0):4 with lines title 'realized', \\\n"
                   << "     '" << f << "' every ::1 using ($1==0?$3:1/0):6 with lines title 'allowed'\n"
                   << "unset logscale y\n";
            } else if (header == "time,state_norm,input_norm") {
                gp << "set output '" << stem << ".png'\nset title '" << f << "'\n";
                gp << "plot '" << f << "' every ::1 using 1:2 with lines title 'state norm'\n";
            }
        }
    }
    gp << "unset output\n";
    return path;
}

}  // namespace detail

}  // namespace isslab::experiments
