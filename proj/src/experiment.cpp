#include "dwis/experiment.hpp"

#include "dwis/error.hpp"
#include "dwis/io.hpp"
#include "dwis/plot.hpp"
#include "dwis/random.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace dwis {

using detail::require;

std::string SweepCell::name() const {
    return std::string(to_string(scheme)) + "_mu" + format_double(mu) + "_d" +
           format_double(delta0) + "_s" + std::to_string(seed);
}

std::vector<SweepCell> ExperimentSpec::cells() const {
    std::vector<SweepCell> out;
    for (auto scheme : schemes)
        for (double m : mu)
            for (double d : delta0)
                for (auto seed : seeds) out.push_back({out.size(), scheme, m, d, seed});
    return out;
}

DwisConfig ExperimentSpec::config_for(const SweepCell& cell) const {
    DwisConfig c = dwis;
    c.scheme = cell.scheme;
    c.mu = cell.mu;
    c.delta0 = cell.delta0;
    c.delta_min = delta_min_ratio * cell.delta0;
    c.seed = cell.seed;
    c.evolution = evolution;
    return c;
}

void ExperimentSpec::validate() const {
    field.validate();
    evolution.validate();
    grid.validate();
    require(sensors >= 1, "sensors: must be >= 1");
    require(delta_min_ratio > 0.0 && delta_min_ratio < 1.0,
            "dwis.delta_min_ratio: must satisfy 0 < ratio < 1");
    for (double m : mu)
        require(std::isfinite(m) && m >= 0.0 && m <= 1.0,
                "sweep.mu: value " + format_double(m) + " violates 0 <= mu <= 1");
    for (double d : delta0)
        require(std::isfinite(d) && d > 0.0, "sweep.delta0: value " + format_double(d) + " must be > 0");
    // Scheme/mu/delta0 of the base config are placeholders; check the rest through one cell.
    DwisConfig probe = dwis;
    probe.delta_min.reset();
    probe.validate();
}

namespace {

class SpecReader {
public:
    explicit SpecReader(YAML::Node root) : root_(std::move(root)) {}

    YAML::Node section(const std::string& key) const {
        auto node = root_[key];
        if (!node) throw ParameterError("missing required field '" + key + "'");
        if (!node.IsMap()) throw ParameterError("field '" + key + "': expected a table");
        return node;
    }

    template <typename T>
    static void optional(const YAML::Node& parent, const std::string& path, const std::string& key,
                         T& target) {
        auto node = parent[key];
        if (!node) return;
        target = convert<T>(node, path + "." + key);
    }

    template <typename T>
    static T required(const YAML::Node& parent, const std::string& path, const std::string& key) {
        auto node = parent[key];
        if (!node) throw ParameterError("missing required field '" + path + "." + key + "'");
        return convert<T>(node, path + "." + key);
    }

    template <typename T>
    static T convert(const YAML::Node& node, const std::string& path) {
        try {
            return node.as<T>();
        } catch (const YAML::Exception&) {
            throw ParameterError("field '" + path + "': wrong type");
        }
    }

    static Interval interval(const YAML::Node& parent, const std::string& path, const std::string& key,
                             Interval fallback) {
        auto node = parent[key];
        if (!node) return fallback;
        auto v = convert<std::vector<double>>(node, path + "." + key);
        if (v.size() != 2) throw ParameterError("field '" + path + "." + key + "': expected [lo, hi]");
        return {v[0], v[1]};
    }

    static void reject_unknown(const YAML::Node& node, const std::string& path,
                               const std::set<std::string>& known) {
        for (const auto& kv : node) {
            const auto key = kv.first.as<std::string>();
            if (!known.count(key))
                throw ParameterError("unknown field '" + (path.empty() ? key : path + "." + key) + "'");
        }
    }

private:
    YAML::Node root_;
};

} // namespace

ExperimentSpec parse_spec(std::string_view yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::Exception& e) {
        throw ParameterError(std::string("spec is not valid YAML: ") + e.what());
    }
    if (!root.IsMap()) throw ParameterError("spec must be a table at the top level");
    SpecReader reader(root);
    SpecReader::reject_unknown(root, "", {"field", "area", "grid", "sensors", "dwis", "sweep", "output"});

    ExperimentSpec spec;
    {
        auto f = reader.section("field");
        SpecReader::reject_unknown(f, "field", {"n1", "n2", "sigma_a", "sigma_b", "amp_a", "amp_b",
                                                "drift_sigma", "amp_jitter", "dt"});
        SpecReader::optional(f, "field", "n1", spec.field.n1);
        SpecReader::optional(f, "field", "n2", spec.field.n2);
        SpecReader::optional(f, "field", "sigma_a", spec.field.sigma_a);
        SpecReader::optional(f, "field", "sigma_b", spec.field.sigma_b);
        spec.field.amp_a = SpecReader::interval(f, "field", "amp_a", spec.field.amp_a);
        spec.field.amp_b = SpecReader::interval(f, "field", "amp_b", spec.field.amp_b);
        SpecReader::optional(f, "field", "drift_sigma", spec.evolution.drift_sigma);
        SpecReader::optional(f, "field", "amp_jitter", spec.evolution.amp_jitter);
        SpecReader::optional(f, "field", "dt", spec.evolution.dt);
    }
    {
        auto a = reader.section("area");
        SpecReader::reject_unknown(a, "area", {"x_min", "x_max", "y_min", "y_max"});
        Bounds& b = spec.field.area;
        b.x_min = SpecReader::required<double>(a, "area", "x_min");
        b.x_max = SpecReader::required<double>(a, "area", "x_max");
        b.y_min = SpecReader::required<double>(a, "area", "y_min");
        b.y_max = SpecReader::required<double>(a, "area", "y_max");
        spec.grid.bounds = b;
    }
    {
        auto g = reader.section("grid");
        SpecReader::reject_unknown(g, "grid", {"nx", "ny"});
        spec.grid.nx = SpecReader::required<std::size_t>(g, "grid", "nx");
        spec.grid.ny = SpecReader::required<std::size_t>(g, "grid", "ny");
    }
    if (!root["sensors"]) throw ParameterError("missing required field 'sensors'");
    spec.sensors = SpecReader::convert<std::size_t>(root["sensors"], "sensors");
    {
        auto d = reader.section("dwis");
        SpecReader::reject_unknown(d, "dwis", {"m0", "p", "spatial_iters", "temporal_steps",
                                               "pilot_fraction", "delta_min_ratio", "pdf_bins", "ridge"});
        SpecReader::optional(d, "dwis", "m0", spec.dwis.m0);
        SpecReader::optional(d, "dwis", "p", spec.dwis.p);
        SpecReader::optional(d, "dwis", "spatial_iters", spec.dwis.spatial_iters);
        SpecReader::optional(d, "dwis", "temporal_steps", spec.dwis.temporal_steps);
        SpecReader::optional(d, "dwis", "pilot_fraction", spec.dwis.pilot_fraction);
        SpecReader::optional(d, "dwis", "delta_min_ratio", spec.delta_min_ratio);
        SpecReader::optional(d, "dwis", "pdf_bins", spec.dwis.pdf_bins);
        SpecReader::optional(d, "dwis", "ridge", spec.dwis.ridge_scale);
    }
    {
        auto s = reader.section("sweep");
        SpecReader::reject_unknown(s, "sweep", {"schemes", "mu", "delta0", "seeds"});
        for (const auto& name : SpecReader::required<std::vector<std::string>>(s, "sweep", "schemes")) {
            auto scheme = parse_scheme(name);
            if (!scheme)
                throw ParameterError("field 'sweep.schemes': unknown scheme '" + name +
                                     "' (expected U_SG, LM_SG or LM_FIX)");
            spec.schemes.push_back(*scheme);
        }
        spec.mu = SpecReader::required<std::vector<double>>(s, "sweep", "mu");
        spec.delta0 = SpecReader::required<std::vector<double>>(s, "sweep", "delta0");
        spec.seeds = SpecReader::required<std::vector<std::uint64_t>>(s, "sweep", "seeds");
    }
    if (root["output"]) spec.output_dir = SpecReader::convert<std::string>(root["output"], "output");

    spec.validate();
    return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot read spec file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_spec(buffer.str());
}

bool SweepReport::all_ok() const {
    return std::all_of(cells.begin(), cells.end(), [](const CellOutcome& c) { return c.ok; });
}

RunResult run_cell(const ExperimentSpec& spec, const SweepCell& cell) {
    const auto config = spec.config_for(cell);
    const auto field = build_field(spec.field, derive_seed(cell.seed, SeedStream::Field));
    auto sensors = deploy(spec.sensors, spec.field.area, derive_seed(cell.seed, SeedStream::Sensors));
    return run_dwis(field, std::move(sensors), spec.grid, config);
}

namespace {

std::string sanitize(std::string text) {
    std::replace(text.begin(), text.end(), ',', ';');
    std::replace(text.begin(), text.end(), '\n', ' ');
    return text;
}

constexpr std::string_view kManifestHeader = "index,scheme,mu,delta0,seed,status,file,message";

} // namespace

void write_manifest(const std::filesystem::path& path, const std::vector<CellOutcome>& cells) {
    std::ofstream out(path);
    if (!out) throw ParameterError("cannot write manifest '" + path.string() + "'");
    out << kManifestHeader << '\n';
    for (const auto& c : cells)
        out << c.cell.index << ',' << to_string(c.cell.scheme) << ',' << format_double(c.cell.mu) << ','
            << format_double(c.cell.delta0) << ',' << c.cell.seed << ',' << (c.ok ? "ok" : "failed")
            << ',' << c.file << ',' << sanitize(c.message) << '\n';
}

std::vector<CellOutcome> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot read manifest '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line) != split_csv_line(kManifestHeader))
        throw ParameterError("manifest: unexpected header");
    std::vector<CellOutcome> cells;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != 8) throw ParameterError("manifest: malformed row '" + line + "'");
        CellOutcome c;
        auto scheme = parse_scheme(f[1]);
        if (!scheme) throw ParameterError("manifest: unknown scheme '" + f[1] + "'");
        c.cell = {std::stoull(f[0]), *scheme, parse_double(f[2]), parse_double(f[3]), std::stoull(f[4])};
        c.ok = f[5] == "ok";
        c.file = f[6];
        c.message = f[7];
        cells.push_back(std::move(c));
    }
    return cells;
}

SweepReport run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
    namespace fs = std::filesystem;
    const fs::path out_dir = options.out_dir.empty() ? spec.output_dir : options.out_dir;
    fs::create_directories(out_dir / "cells");

    const auto cells = spec.cells();
    SweepReport report;
    report.cells.resize(cells.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            CellOutcome& outcome = report.cells[i];
            outcome.cell = cells[i];
            outcome.file = "cells/" + cells[i].name() + ".csv";
            try {
                const auto result = run_cell(spec, cells[i]);
                std::ofstream out(out_dir / outcome.file);
                if (!out) throw ParameterError("cannot write " + outcome.file);
                write_run_csv(out, result);
                outcome.ok = static_cast<bool>(out);
            } catch (const std::exception& e) {
                outcome.ok = false;
                outcome.message = e.what();
            }
        }
    };
    const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(cells.size(), 1));
    {
        std::vector<std::jthread> pool;
        for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
        worker();
    }

    write_manifest(out_dir / "manifest.csv", report.cells);
    if (std::any_of(report.cells.begin(), report.cells.end(), [](const CellOutcome& c) { return c.ok; }))
        write_figures(out_dir, options.db_axis);
    return report;
}

} // namespace dwis
