#include "spectral/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spectral/codec.hpp"
#include "spectral/container_io.hpp"
#include "spectral/metrics.hpp"
#include "spectral/pipeline.hpp"

namespace spectral::cli {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const char* what) {
    std::vector<T> out;
    for (const auto& item : split_list(s)) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(item, &pos);
            if (pos != item.size()) throw std::invalid_argument(item);
            out.push_back(static_cast<T>(v));
        } catch (const std::exception&) {
            throw InputError(std::string("bad value '") + item + "' in " + what);
        }
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

// Options shared by every command that builds a plan.
struct PlanOptions {
    std::string strategy = "uniform";
    std::string method = "dct";
    std::string metric = "euclidean";
    std::string start_norm = "l2";
    std::string preset = "default";
    std::uint32_t g = 4;
    std::optional<double> r;
    std::optional<double> r_prime;
    std::string exclude;
    std::uint64_t min_params = 0;
    bool include_first = false;
    std::string plan_in;
    std::string plan_out;

    void attach(CLI::App* cmd, bool with_plan_files = true) {
        cmd->add_option("--strategy", strategy, "uniform | progressive-r | progressive-g")
            ->check(CLI::IsMember({"uniform", "progressive-r", "progressive-g"}));
        cmd->add_option("--method", method, "dct | l1")->check(CLI::IsMember({"dct", "l1"}));
        cmd->add_option("--metric", metric, "reordering distance")
            ->check(CLI::IsMember({"euclidean", "manhattan", "cosine"}));
        cmd->add_option("--start-norm", start_norm, "norm picking the first column")
            ->check(CLI::IsMember({"l2", "l1"}));
        cmd->add_option("--g", g, "number of groups")->check(CLI::PositiveNumber);
        cmd->add_option("--r", r, "compression rate (uniform, progressive-g)");
        cmd->add_option("--r-prime", r_prime, "rate increase of the reference layer (progressive-r)");
        cmd->add_option("--preset", preset, "inclusion policy preset")
            ->check(CLI::IsMember({"default", "resnet50", "mobilenet_v2"}));
        cmd->add_option("--exclude", exclude, "comma-separated layer names; 'prefix*' matches a prefix");
        cmd->add_option("--min-params", min_params, "leave layers with fewer weights uncompressed");
        cmd->add_flag("--include-first", include_first, "also compress the first weight tensor");
        if (with_plan_files) {
            cmd->add_option("--plan-in", plan_in, "read the plan from JSON instead of a strategy");
            cmd->add_option("--plan-out", plan_out, "write the plan as JSON");
        }
    }

    PlanRequest request() const {
        PlanRequest req;
        req.strategy = parse_strategy(strategy);
        req.method = parse_method(method);
        req.metric = parse_metric(metric);
        req.g = g;
        req.r = r;
        req.r_prime = r_prime;
        req.policy = InclusionPolicy::preset(preset);
        if (include_first) req.policy.exclude_first = false;
        for (auto& name : split_list(exclude)) req.policy.exclude.push_back(name);
        req.policy.min_params = std::max(req.policy.min_params, min_params);
        return req;
    }

    StartNorm start() const { return start_norm == "l1" ? StartNorm::l1 : StartNorm::l2; }

    CompressionPlan plan(const std::vector<ManifestEntry>& entries) const {
        CompressionPlan p = plan_in.empty() ? build_plan(entries, request()) : plan_from_json(read_json(plan_in));
        if (!plan_out.empty()) write_text(plan_out, plan_to_json(p).dump(2) + "\n");
        return p;
    }
};

void print_totals(std::ostream& out, const char* label, const FootprintTotals& t) {
    out << std::fixed << std::setprecision(4) << label << ": original " << t.original << ", stored " << t.stored
        << " (" << 100.0 * t.size_fraction() << "%), trainable " << t.trainable << ", index " << t.index
        << ", trainable fraction " << t.trainable_fraction() << '\n';
    out.unsetf(std::ios::fixed);
}

void print_report(std::ostream& out, const FootprintReport& report) {
    print_totals(out, "all tensors", report.all);
    print_totals(out, "weights only", report.weights_only);
    if (const auto agg = report.aggregate_nsse())
        out << "aggregate nSSE (parameter-weighted): " << std::setprecision(6) << *agg << '\n';
}

void write_reports(const FootprintReport& report, const std::string& json_path, const std::string& csv_path) {
    if (!json_path.empty()) write_text(json_path, report_to_json(report).dump(2) + "\n");
    if (!csv_path.empty()) write_text(csv_path, report_to_csv(report));
}

std::vector<ManifestEntry> entries_of(const WeightStore& store) {
    std::vector<ManifestEntry> out;
    for (const auto& l : store.layers) out.push_back({l.name, l.shape, {}});
    return out;
}

// ---------------------------------------------------------------------------

struct CompressArgs {
    std::string store, out, report, report_csv;
    unsigned jobs = 1;
    PlanOptions plan;
};

int cmd_compress(const CompressArgs& a, std::ostream& out) {
    const WeightStore store = read_weight_store(a.store);
    const CompressionPlan plan = a.plan.plan(entries_of(store));
    for (const auto& w : plan.warnings) out << "warning: " << w << '\n';
    const CompressionOutput result = compress_store(store, plan, a.plan.start(), a.jobs);
    write_compressed(result.container, a.out);
    write_reports(result.report, a.report, a.report_csv);
    out << "wrote " << a.out << " (" << result.container.size() << " records, strategy "
        << strategy_name(plan.strategy) << ")\n";
    print_report(out, result.report);
    return kSuccess;
}

struct DecompressArgs {
    std::string container, out, model;
    unsigned jobs = 1;
};

int cmd_decompress(const DecompressArgs& a, std::ostream& out) {
    const auto container = read_compressed(a.container);
    const std::string model = a.model.empty() ? fs::path(a.container).stem().string() : a.model;
    write_weight_store(decompress_store(container, model, a.jobs), a.out);
    out << "wrote " << container.size() << " tensors to " << a.out << '\n';
    return kSuccess;
}

struct StatsArgs {
    std::string store, container, report, report_csv;
    PlanOptions plan;
};

int cmd_stats(const StatsArgs& a, std::ostream& out) {
    const Manifest manifest = read_manifest(a.store);
    FootprintReport report;
    if (!a.container.empty()) {
        WeightStore shapes{manifest.model, {}};
        for (const auto& e : manifest.layers) shapes.layers.push_back({e.name, e.shape, DType::f32, {}});
        report = footprint(read_compressed(a.container), shapes);
    } else {
        const CompressionPlan plan = a.plan.plan(manifest.layers);
        for (const auto& w : plan.warnings) out << "warning: " << w << '\n';
        if (!plan.reference.empty()) out << "reference layer: " << plan.reference << '\n';
        report = footprint_from_plan(plan);
    }
    write_reports(report, a.report, a.report_csv);
    out << "model " << (manifest.model.empty() ? "?" : manifest.model) << ", " << manifest.layers.size()
        << " tensors\n";
    print_report(out, report);
    return kSuccess;
}

struct VerifyArgs {
    std::string store, container;
    unsigned jobs = 1;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
    const WeightStore store = read_weight_store(a.store);
    const auto container = read_compressed(a.container);
    const VerifyResult res = verify_container(container, store, a.jobs);
    for (const auto& l : res.layers) {
        out << (l.ok ? "ok   " : "FAIL ") << l.name << " [" << method_name(l.method) << "] max-abs "
            << std::setprecision(6) << l.max_abs_error;
        if (l.nsse) out << " nsse " << *l.nsse;
        if (!l.ok) out << " : " << l.problem;
        out << '\n';
    }
    if (container.size() != store.layers.size())
        out << "FAIL record count " << container.size() << " != store layer count " << store.layers.size() << '\n';
    out << "max-abs reconstruction error: " << res.max_abs_error << '\n';
    out << (res.ok ? "verify: ok" : "verify: FAILED") << '\n';
    return res.ok ? kSuccess : kInputError;
}

struct SweepArgs {
    std::string store, out;
    std::string strategies = "uniform,progressive-r,progressive-g";
    std::string g_list = "4,8,16";
    std::string r_list = "2,4,8,16,32";
    std::string r_prime_list = "0.125,0.25,0.5,1,2";
    bool accounting_only = false;
    unsigned jobs = 1;
    PlanOptions plan;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    const auto gs = parse_list<std::uint32_t>(a.g_list, "--g-list");
    const auto rs = parse_list<double>(a.r_list, "--r-list");
    const auto rps = parse_list<double>(a.r_prime_list, "--r-prime-list");

    struct Cell {
        Strategy strategy;
        std::uint32_t g;
        std::optional<double> r, r_prime;
    };
    std::vector<Cell> cells;
    for (const auto& s : split_list(a.strategies)) {
        const Strategy st = parse_strategy(s);
        if (st == Strategy::uniform)
            for (auto g : gs)
                for (auto r : rs) cells.push_back({st, g, r, std::nullopt});
        if (st == Strategy::progressive_r)
            for (auto g : gs)
                for (auto rp : rps) cells.push_back({st, g, std::nullopt, rp});
        if (st == Strategy::progressive_g)
            for (auto r : rs) cells.push_back({st, 0, r, std::nullopt});
    }

    std::optional<WeightStore> store;
    std::vector<ManifestEntry> entries;
    if (a.accounting_only) {
        entries = read_manifest(a.store).layers;
    } else {
        store = read_weight_store(a.store);
        entries = entries_of(*store);
    }

    std::ostringstream csv;
    csv << "strategy,g,r,r_prime,original,stored,trainable,index,trainable_fraction,nsse,status\n";
    csv << std::setprecision(10);
    for (const auto& cell : cells) {
        PlanRequest req = a.plan.request();
        req.strategy = cell.strategy;
        req.g = cell.g ? cell.g : 1;
        req.r = cell.r;
        req.r_prime = cell.r_prime;
        csv << strategy_name(cell.strategy) << ',';
        if (cell.g) csv << cell.g;
        csv << ',';
        if (cell.r) csv << *cell.r;
        csv << ',';
        if (cell.r_prime) csv << *cell.r_prime;
        csv << ',';
        try {
            const CompressionPlan plan = build_plan(entries, req);
            FootprintReport report = footprint_from_plan(plan);
            if (store) report = compress_store(*store, plan, a.plan.start(), a.jobs).report;
            const auto& t = report.all;
            csv << t.original << ',' << t.stored << ',' << t.trainable << ',' << t.index << ','
                << t.trainable_fraction() << ',';
            if (const auto agg = report.aggregate_nsse()) csv << *agg;
            csv << ",ok\n";
        } catch (const std::exception& e) {
            std::string why = e.what();
            std::replace(why.begin(), why.end(), ',', ';');
            std::replace(why.begin(), why.end(), '\n', ' ');
            csv << ",,,,,,error: " << why << '\n';
        }
    }
    if (a.out.empty())
        out << csv.str();
    else {
        write_text(a.out, csv.str());
        out << "wrote " << cells.size() << " rows to " << a.out << '\n';
    }
    return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"spcw: spectral (DCT) compression of CNN weight tensors"};
    app.require_subcommand(1);

    CompressArgs ca;
    auto* compress = app.add_subcommand("compress", "compress a weight store into a .spcw container");
    compress->add_option("--store", ca.store, "weight store directory")->required();
    compress->add_option("--out", ca.out, "output container (.spcw)")->required();
    compress->add_option("--report", ca.report, "JSON report path");
    compress->add_option("--report-csv", ca.report_csv, "CSV report path");
    compress->add_option("--jobs", ca.jobs, "worker threads")->check(CLI::PositiveNumber);
    ca.plan.attach(compress);

    DecompressArgs da;
    auto* decompress = app.add_subcommand("decompress", "rebuild a weight store from a container");
    decompress->add_option("--container", da.container, "input container")->required();
    decompress->add_option("--out", da.out, "output store directory")->required();
    decompress->add_option("--model", da.model, "model name for the manifest");
    decompress->add_option("--jobs", da.jobs, "worker threads")->check(CLI::PositiveNumber);

    StatsArgs sa;
    auto* stats = app.add_subcommand("stats", "parameter accounting from shapes only");
    stats->add_option("--store", sa.store, "store directory (only manifest.json is read)")->required();
    stats->add_option("--container", sa.container, "account an existing container instead of a plan");
    stats->add_option("--report", sa.report, "JSON report path");
    stats->add_option("--report-csv", sa.report_csv, "CSV report path");
    sa.plan.attach(stats);

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "check a container against its source store");
    verify->add_option("--store", va.store, "original weight store")->required();
    verify->add_option("--container", va.container, "container to check")->required();
    verify->add_option("--jobs", va.jobs, "worker threads")->check(CLI::PositiveNumber);

    SweepArgs wa;
    auto* sweep = app.add_subcommand("sweep", "footprint / nSSE over a strategy grid, as CSV");
    sweep->add_option("--store", wa.store, "weight store directory")->required();
    sweep->add_option("--out", wa.out, "CSV path (stdout if omitted)");
    sweep->add_option("--strategies", wa.strategies, "comma-separated strategies");
    sweep->add_option("--g-list", wa.g_list, "group counts (uniform, progressive-r)");
    sweep->add_option("--r-list", wa.r_list, "rates (uniform, progressive-g)");
    sweep->add_option("--r-prime-list", wa.r_prime_list, "r' values (progressive-r)");
    sweep->add_flag("--accounting-only", wa.accounting_only, "skip compression; needs only manifest.json");
    sweep->add_option("--jobs", wa.jobs, "worker threads")->check(CLI::PositiveNumber);
    wa.plan.attach(sweep, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kInputError;
    }

    try {
        if (compress->parsed()) return cmd_compress(ca, out);
        if (decompress->parsed()) return cmd_decompress(da, out);
        if (stats->parsed()) return cmd_stats(sa, out);
        if (verify->parsed()) return cmd_verify(va, out);
        if (sweep->parsed()) return cmd_sweep(wa, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
    return kInputError;
}

}  // namespace spectral::cli
