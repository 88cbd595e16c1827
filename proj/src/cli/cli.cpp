#include "fn/cli.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "fn/api/events.hpp"
#include "fn/api/json_codec.hpp"
#include "fn/api/service.hpp"
#include "fn/costmodel.hpp"
#include "fn/evaluation.hpp"
#include "fn/image.hpp"
#include "fn/ingest.hpp"
#include "fn/stats.hpp"
#include "fn/store.hpp"
#include "fn/taxonomy_provider.hpp"
#include "fn/util/csv.hpp"
#include "fn/util/log.hpp"
#include "fn/util/strings.hpp"

namespace fn::cli {

namespace {

using api::Json;
namespace fs = std::filesystem;

std::atomic<bool> g_shutdown{false};

/// Bad input from the user; exit 1.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(data.data(), static_cast<std::streamsize>(data.size()))) {
        throw IoError("cannot write " + path.string());
    }
}

std::string_view stats_kind_name(stats::ErrorKind k) {
    switch (k) {
        case stats::ErrorKind::empty_snapshot: return "empty_snapshot";
        case stats::ErrorKind::unresolvable_concept: return "unresolvable_concept";
        case stats::ErrorKind::no_candidates: return "no_candidates";
        case stats::ErrorKind::inconsistent: return "inconsistent";
        case stats::ErrorKind::no_decodable_images: return "no_decodable_images";
        case stats::ErrorKind::invalid: return "invalid";
    }
    return "invalid";
}

std::string_view eval_kind_name(evaluation::ErrorKind k) {
    switch (k) {
        case evaluation::ErrorKind::invalid: return "invalid";
        case evaluation::ErrorKind::unknown_label: return "unknown_label";
        case evaluation::ErrorKind::unordered: return "unordered";
        case evaluation::ErrorKind::precondition: return "precondition";
    }
    return "invalid";
}

void report_error(std::ostream& err, std::string_view kind, std::string_view message,
                  const std::vector<catalog::FieldError>& fields = {}) {
    err << api::error_json(kind, message, fields).dump() << '\n';
}

/// Runs `body`, mapping failures to exit codes and error lines.
template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const IoError& e) {
        report_error(err, "io", e.what());
        return kIo;
    } catch (const catalog::CatalogError& e) {
        report_error(err, catalog::error_kind_name(e.kind()), e.what(), e.fields());
        return e.kind() == catalog::ErrorKind::storage ? kIo : kValidation;
    } catch (const taxonomy::TaxonomyError& e) {
        report_error(err, taxonomy::error_kind_name(e.kind()), e.what());
        return e.kind() == taxonomy::ErrorKind::provider ? kIo : kValidation;
    } catch (const stats::StatsError& e) {
        report_error(err, stats_kind_name(e.kind()), e.what());
        return kValidation;
    } catch (const evaluation::EvalError& e) {
        report_error(err, eval_kind_name(e.kind()), e.what());
        return kValidation;
    } catch (const std::invalid_argument& e) {
        report_error(err, "validation", e.what());
        return kValidation;
    } catch (const std::exception& e) {
        report_error(err, "io", e.what());
        return kIo;
    }
}

bool is_url(std::string_view s) { return s.starts_with("http://") || s.starts_with("https://"); }

/// Lazily opened taxonomy and catalog.
class Context {
public:
    Context(Config config, std::ostream& out, std::ostream& err)
        : config(std::move(config)), out(out), err(err) {}

    Config config;
    std::ostream& out;
    std::ostream& err;

    std::shared_ptr<const taxonomy::ConceptTree> tree() {
        if (tree_) return tree_;
        if (!config.taxonomy) throw UsageError("no taxonomy configured; pass --taxonomy or set FN_TAXONOMY");
        const auto& source = *config.taxonomy;
        if (is_url(source)) {
            taxonomy::RemoteTaxonomyProvider provider(source);
            tree_ = std::make_shared<const taxonomy::ConceptTree>(taxonomy::load_taxonomy(provider, config.taxonomy_root));
        } else {
            if (!fs::is_regular_file(source)) throw IoError("cannot read taxonomy " + source);
            tree_ = std::make_shared<const taxonomy::ConceptTree>(taxonomy::load_taxonomy_file(source));
        }
        return tree_;
    }

    catalog::Catalog& catalog() {
        if (catalog_) return *catalog_;
        auto handle = std::make_shared<taxonomy::TaxonomyHandle>(tree());
        std::shared_ptr<catalog::CatalogStore> store = catalog::open_sqlite_store(config.store);
        catalog_ = std::make_unique<catalog::Catalog>(std::move(store), std::move(handle));
        return *catalog_;
    }

private:
    std::shared_ptr<const taxonomy::ConceptTree> tree_;
    std::unique_ptr<catalog::Catalog> catalog_;
};

/// Image filters shared by stats and export.
struct FilterOptions {
    std::map<std::string, std::string> values;
    bool descendants = false;

    void attach(CLI::App* app, bool with_concept = true) {
        auto opt = [&](const std::string& flag, const std::string& key, const std::string& help) {
            app->add_option_function<std::string>(flag, [this, key](const std::string& v) { values[key] = v; }, help);
        };
        if (with_concept) {
            opt("--concept", "concept", "concept name or alias");
            app->add_flag("--descendants", descendants, "include the concept's subtree");
        }
        opt("--minlat", "minlat", "south bound");
        opt("--maxlat", "maxlat", "north bound");
        opt("--minlon", "minlon", "west bound");
        opt("--maxlon", "maxlon", "east bound");
        opt("--mindepth", "mindepth", "shallowest depth in metres");
        opt("--maxdepth", "maxdepth", "deepest depth in metres");
        opt("--imaging-type", "imaging_type", "imaging type");
        opt("--state", "state", "unverified, verified or rejected");
        opt("--collection", "collection", "collection uuid");
        opt("--contributor", "contributor", "contributor email");
    }

    catalog::QueryFilter filter() const {
        std::multimap<std::string, std::string> params(values.begin(), values.end());
        if (descendants) params.emplace("descendants", "true");
        return api::filter_from_params(params);
    }
};

std::string histogram_csv(const stats::Histogram& h) {
    std::string out = util::csv_line({"bin_start", "bin_end", "count", "percent"});
    const auto pct = h.percent();
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        out += util::csv_line({util::format_double(h.edges[i]), util::format_double(h.edges[i + 1]),
                               std::to_string(h.counts[i]), util::format_double(pct[i])});
    }
    return out;
}

taxonomy::Rank ranked(const std::string& text) {
    const auto r = taxonomy::parse_rank(text);
    if (!r || !taxonomy::is_ranked(*r)) {
        throw UsageError("unknown rank " + text + "; expected kingdom, phylum, class, order, family, genus or species");
    }
    return *r;
}

Json segments_json(const std::vector<evaluation::Segment>& segs) {
    Json a = Json::array();
    for (const auto& s : segs) a.push_back({s.start, s.end});
    return a;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

// Subcommand bodies. Each returns an exit code.

struct IngestArgs {
    std::string csv;
    std::optional<std::string> meta;
    bool dry_run = false;
};

int cmd_ingest(Context& ctx, const IngestArgs& a) {
    const fs::path csv_path = a.csv;
    const fs::path meta_path = a.meta ? fs::path(*a.meta) : fs::path(csv_path).replace_extension(".meta");
    const auto csv = read_file(csv_path);
    const auto meta = read_file(meta_path);
    const auto result = ingest::ingest(ctx.catalog(), meta, csv, a.dry_run);
    Json j = api::to_json(result.report);
    j["dry_run"] = a.dry_run;
    j["collection"] = result.collection_uuid ? Json(*result.collection_uuid) : Json(nullptr);
    j["images_added"] = result.counts.images;
    j["localizations_added"] = result.counts.localizations;
    ctx.out << j.dump(2) << '\n';
    if (!result.report.ok()) {
        report_error(ctx.err, "validation",
                     std::to_string(result.report.errors.size()) + " error(s); nothing was written");
        return kValidation;
    }
    return kOk;
}

int cmd_serve(Context& ctx) {
    const auto hp = parse_bind(ctx.config.bind);
    auto& catalog = ctx.catalog();
    api::EventBus bus(api::make_sink(ctx.config.events));
    api::ServiceConfig sc;
    sc.host = hp.host;
    sc.port = hp.port;
    sc.token = ctx.config.token;
    api::Service service(sc, catalog, bus);
    int port = 0;
    try {
        port = service.bind();
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }
    if (!ctx.config.token) log::warn("no token configured; writes will be refused");
    g_shutdown = false;
    service.start();
    log::info("listening on " + hp.host + ":" + std::to_string(port));
    while (!g_shutdown) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    service.stop();
    log::info("stopped");
    return kOk;
}

struct StatsArgs {
    FilterOptions filters;
    std::string rank = "species";
    std::string concept_name;
    std::size_t n = 50;
    std::uint64_t seed = 0;
    std::string review;
    std::string out_png;
    int size = 128;
    std::string cache_dir = ".fn-cache";
};

std::vector<catalog::ImageEntry> snapshot(Context& ctx, const FilterOptions& f) {
    return ctx.catalog().select(f.filter());
}

int cmd_stats_instances(Context& ctx, const StatsArgs& a) {
    const auto snap = snapshot(ctx, a.filters);
    ctx.out << histogram_csv(stats::instances_per_image(snap));
    return kOk;
}

int cmd_stats_concepts(Context& ctx, const StatsArgs& a) {
    const auto rank = ranked(a.rank);
    const auto snap = snapshot(ctx, a.filters);
    ctx.out << histogram_csv(stats::concepts_per_image(snap, *ctx.catalog().taxonomy(), rank));
    return kOk;
}

int cmd_stats_sizes(Context& ctx, const StatsArgs& a) {
    const auto snap = snapshot(ctx, a.filters);
    const auto d = stats::relative_size_distribution(snap);
    ctx.out << histogram_csv(d.histogram);
    if (d.excluded > 0) {
        log::warn(std::to_string(d.excluded) + " localization(s) on images without known dimensions were excluded");
    }
    return kOk;
}

int cmd_stats_sample(Context& ctx, const StatsArgs& a) {
    const auto rank = ranked(a.rank);
    const auto snap = snapshot(ctx, a.filters);
    const auto tree = ctx.catalog().taxonomy();
    const auto uuids = stats::coverage_sample(snap, *tree, a.concept_name, rank, a.n, a.seed);
    std::map<std::string, std::string> urls;
    for (const auto& e : snap) urls[e.image.uuid] = e.image.image_url;
    ctx.out << util::csv_line({"image_uuid", "image_url"});
    for (const auto& u : uuids) ctx.out << util::csv_line({u, urls[u]});
    return kOk;
}

int cmd_stats_coverage(Context& ctx, const StatsArgs& a) {
    const auto rank = ranked(a.rank);
    const auto tree = ctx.tree();
    const auto reviewed = stats::parse_review_csv(read_file(a.review));
    const auto target = stats::level_concepts(*tree, a.concept_name, rank);
    // review sheets may use aliases; compare canonical names
    auto canonical = reviewed;
    for (auto& img : canonical) {
        for (auto* set : {&img.existing, &img.complete}) {
            for (auto& ann : *set) {
                if (auto id = tree->find(ann.concept_name)) ann.concept_name = tree->name(*id);
            }
        }
    }
    const auto report = stats::coverage_recall(canonical, target);
    auto recall = [](std::int64_t have, std::int64_t all) {
        return all == 0 ? 1.0 : static_cast<double>(have) / static_cast<double>(all);
    };
    ctx.out << util::csv_line({"image", "existing_target", "complete_target", "recall_target", "existing_other",
                               "complete_other", "recall_other"});
    for (const auto& c : report.images) {
        ctx.out << util::csv_line({c.image, std::to_string(c.existing_target), std::to_string(c.complete_target),
                                   util::format_double(recall(c.existing_target, c.complete_target)),
                                   std::to_string(c.existing_other), std::to_string(c.complete_other),
                                   util::format_double(recall(c.existing_other, c.complete_other))});
    }
    ctx.out << util::csv_line({"mean", "", "", util::format_double(report.recall_target), "", "",
                               util::format_double(report.recall_other)});
    return kOk;
}

int cmd_stats_average(Context& ctx, const StatsArgs& a) {
    if (a.size <= 0) throw UsageError("--size must be positive");
    const auto snap = snapshot(ctx, a.filters);
    if (snap.empty()) throw stats::StatsError(stats::ErrorKind::empty_snapshot, "snapshot has no images");
    std::vector<std::string> urls;
    for (const auto& e : snap) urls.push_back(e.image.image_url);
    stats::PixelCache cache(a.cache_dir);
    const auto avg = stats::average_image(cache, urls, a.size, a.size);
    for (const auto& s : avg.skipped) log::warn("skipped undecodable image " + s);
    write_file(a.out_png, stats::encode_png(avg.mean));
    ctx.out << util::csv_line({"images", "skipped", "output"})
            << util::csv_line({std::to_string(avg.count), std::to_string(avg.skipped.size()), a.out_png});
    return kOk;
}

struct EvalArgs {
    std::vector<std::string> pred, truth;
    std::vector<double> duration;
    double iou = 0.5;
    double score = 0.5;
    double window = 10;
    std::vector<std::string> labels;
};

int cmd_eval_boxes(Context& ctx, const EvalArgs& a) {
    const auto preds = evaluation::parse_detection_frames(read_file(a.pred.at(0)));
    const auto truths = evaluation::parse_detection_frames(read_file(a.truth.at(0)));
    std::optional<std::vector<std::string>> labels;
    if (!a.labels.empty()) labels = a.labels;
    ctx.out << evaluation::evaluate_boxes(preds, truths, a.iou, a.score, labels).to_csv();
    return kOk;
}

int cmd_eval_activity(Context& ctx, const EvalArgs& a) {
    if (a.pred.size() != a.truth.size()) throw UsageError("--pred and --truth must be given the same number of times");
    if (!a.duration.empty() && a.duration.size() != a.pred.size()) {
        throw UsageError("--duration must be given once per video or not at all");
    }
    std::vector<evaluation::VideoInput> videos;
    for (std::size_t i = 0; i < a.pred.size(); ++i) {
        const auto frames = evaluation::parse_detection_frames(read_file(a.pred[i]));
        evaluation::VideoInput v;
        v.signal = evaluation::activity_signal(frames, a.score);
        v.truth = evaluation::parse_segments(read_file(a.truth[i]));
        if (!a.duration.empty()) v.duration_s = a.duration[i];
        videos.push_back(std::move(v));
    }
    const auto report = evaluation::evaluate_activity(videos, a.window);
    Json j;
    j["window_s"] = a.window;
    j["score_threshold"] = a.score;
    j["videos"] = Json::array();
    for (std::size_t i = 0; i < report.videos.size(); ++i) {
        const auto& v = report.videos[i];
        j["videos"].push_back({{"pred", a.pred[i]},
                               {"truth", a.truth[i]},
                               {"duration_s", v.duration_s},
                               {"iou", v.iou},
                               {"recall", optional_json(v.recall)},
                               {"effort_reduction", v.effort_reduction},
                               {"predicted_segments", segments_json(v.predicted)},
                               {"truth_segments", segments_json(v.truth)}});
    }
    j["mean_iou"] = report.mean_iou;
    j["pooled_iou"] = report.pooled_iou;
    j["pooled_recall"] = optional_json(report.pooled_recall);
    j["pooled_effort_reduction"] = report.pooled_effort_reduction;
    ctx.out << j.dump(2) << '\n';
    return kOk;
}

struct CostArgs {
    std::optional<double> hours, rate, images, iph;
    double redundancy = 1;
    double mid = 0, benthic = 0, mid_rate = 1, benthic_rate = 3;
};

int cmd_cost(Context& ctx, const CostArgs& a) {
    if (a.hours) {
        if (a.images || a.iph) throw UsageError("give either --hours or --images/--iph, not both");
        if (!a.rate) throw UsageError("--hours needs --rate");
        ctx.out << costmodel::estimate_cost(*a.hours, *a.rate) << '\n';
        return kOk;
    }
    if (a.images) {
        if (!a.iph) throw UsageError("--images needs --iph");
        const double hours = costmodel::estimate_hours(*a.images, *a.iph, a.redundancy);
        if (a.rate) {
            ctx.out << costmodel::estimate_cost(hours, *a.rate) << '\n';
        } else {
            ctx.out << util::format_double(hours) << '\n';
        }
        return kOk;
    }
    throw UsageError("cost needs --hours and --rate, or --images and --iph");
}

int cmd_cost_expert(Context& ctx, const CostArgs& a) {
    ctx.out << costmodel::expert_cost(a.mid, a.benthic, a.mid_rate, a.benthic_rate) << '\n';
    return kOk;
}

struct TaxonomyArgs {
    std::string name;
    std::string rank = "species";
    std::optional<std::string> supercategories;
};

int cmd_taxonomy_show(Context& ctx, const TaxonomyArgs& a) {
    const auto tree = ctx.tree();
    ctx.out << api::concept_json(*tree, tree->resolve(a.name)).dump(2) << '\n';
    return kOk;
}

int cmd_taxonomy_descendants(Context& ctx, const TaxonomyArgs& a) {
    const auto tree = ctx.tree();
    ctx.out << util::csv_line({"name", "rank"});
    for (auto id : tree->descendants(tree->resolve(a.name))) {
        ctx.out << util::csv_line({tree->name(id), std::string(taxonomy::rank_name(tree->node(id).rank))});
    }
    return kOk;
}

int cmd_taxonomy_label(Context& ctx, const TaxonomyArgs& a) {
    const auto tree = ctx.tree();
    const auto rank = taxonomy::parse_rank(a.rank);
    if (!rank) throw UsageError("unknown rank " + a.rank);
    ctx.out << tree->rank_label(tree->resolve(a.name), *rank) << '\n';
    return kOk;
}

int cmd_taxonomy_validate(Context& ctx, const TaxonomyArgs& a) {
    const auto tree = ctx.tree();
    Json j{{"nodes", tree->size()}, {"root", tree->name(tree->root())}};
    if (a.supercategories) {
        auto map = taxonomy::SupercategoryMap::parse(read_file(*a.supercategories));
        map.validate(*tree);
        j["supercategories"] = map.entries().size();
    }
    ctx.out << j.dump() << '\n';
    return kOk;
}

struct ExportArgs {
    FilterOptions filters;
    std::optional<std::string> out;
};

int cmd_export(Context& ctx, const ExportArgs& a) {
    auto& catalog = ctx.catalog();
    const auto& v = a.filters.values;
    if (v.size() == 1 && v.count("collection") && !a.filters.descendants) {
        const auto exported = ingest::export_collection(catalog, v.at("collection"));
        if (a.out) {
            write_file(*a.out, exported.csv);
            write_file(fs::path(*a.out).replace_extension(".meta"), exported.meta);
        } else {
            ctx.out << exported.csv;
        }
        return kOk;
    }
    auto filter = a.filters.filter();
    const auto csv = ingest::export_csv(catalog.select(filter));
    if (a.out) {
        write_file(*a.out, csv);
    } else {
        ctx.out << csv;
    }
    return kOk;
}

}  // namespace

void request_shutdown() { g_shutdown = true; }

int run(const std::vector<std::string>& argv, const Env& env, std::ostream& out, std::ostream& err) {
    CLI::App app{"Image catalog, statistics and detector evaluation for annotated ocean imagery", "fn"};
    app.fallthrough();
    app.require_subcommand(1);

    ConfigFlags flags;
    app.add_option("--config", flags.config_file, "key=value config file (also FN_CONFIG)");
    app.add_option("--store", flags.store, "catalog database path (FN_STORE)");
    app.add_option("--taxonomy", flags.taxonomy, "taxonomy file or name-lookup URL (FN_TAXONOMY)");
    app.add_option("--taxonomy-root", flags.taxonomy_root, "root name when walking a remote taxonomy");
    app.add_option("--log-level", flags.log_level, "debug, info, warn, error or off");

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "Validate and load a CSV collection with its .meta sidecar");
    ingest->add_option("csv", ingest_args.csv, "collection CSV")->required();
    ingest->add_option("--meta", ingest_args.meta, "sidecar path; defaults to the CSV path with a .meta extension");
    ingest->add_flag("--dry-run", ingest_args.dry_run, "validate and report without writing");

    auto* serve = app.add_subcommand("serve", "Run the HTTP service until interrupted");
    serve->add_option("--bind", flags.bind, "host:port (FN_BIND)");
    serve->add_option("--token", flags.token, "bearer token for writes (FN_TOKEN)");
    serve->add_option("--events", flags.events, "event sink: stdout, file:<path> or none");

    StatsArgs stats_args;
    auto* stats = app.add_subcommand("stats", "Dataset statistics as CSV tables");
    stats->require_subcommand(1);
    auto* s_inst = stats->add_subcommand("instances", "Histogram of localizations per image");
    stats_args.filters.attach(s_inst);
    auto* s_conc = stats->add_subcommand("concepts", "Histogram of distinct concepts per image at a rank");
    s_conc->add_option("--rank", stats_args.rank, "rank to count at")->capture_default_str();
    auto* s_size = stats->add_subcommand("sizes", "Histogram of box area over image area, log-spaced bins");
    auto* s_samp = stats->add_subcommand("sample", "Seeded random sample of images holding a concept's rank group");
    s_samp->add_option("--concept", stats_args.concept_name, "target concept")->required();
    s_samp->add_option("--rank", stats_args.rank, "rank defining the group")->capture_default_str();
    s_samp->add_option("-n,--count", stats_args.n, "sample size")->capture_default_str();
    s_samp->add_option("--seed", stats_args.seed, "generator seed")->capture_default_str();
    auto* s_cov = stats->add_subcommand("coverage", "Annotation recall from an expert review sheet");
    s_cov->add_option("--review", stats_args.review, "CSV image,annotation,concept,existing")->required();
    s_cov->add_option("--concept", stats_args.concept_name, "target concept")->required();
    s_cov->add_option("--rank", stats_args.rank, "rank defining the target group")->capture_default_str();
    auto* s_avg = stats->add_subcommand("average", "Pixelwise mean image written as PNG");
    s_avg->add_option("--out", stats_args.out_png, "output PNG")->required();
    s_avg->add_option("--size", stats_args.size, "output width and height")->capture_default_str();
    s_avg->add_option("--cache", stats_args.cache_dir, "pixel cache directory")->capture_default_str();
    stats_args.filters.attach(s_conc);
    stats_args.filters.attach(s_size);
    stats_args.filters.attach(s_samp, false);
    stats_args.filters.attach(s_avg);

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "Score detections against ground truth");
    eval->require_subcommand(1);
    auto* e_box = eval->add_subcommand("boxes", "Confusion matrix with a background class, as CSV");
    e_box->add_option("--pred", eval_args.pred, "detection CSV")->required()->expected(1);
    e_box->add_option("--truth", eval_args.truth, "ground-truth CSV")->required()->expected(1);
    e_box->add_option("--iou", eval_args.iou, "IoU threshold for a match")->capture_default_str();
    e_box->add_option("--score", eval_args.score, "drop predictions scoring below this")->capture_default_str();
    e_box->add_option("--labels", eval_args.labels, "label order for the matrix")->delimiter(',');
    auto* e_act = eval->add_subcommand("activity", "Activity segments, temporal IoU, recall and effort reduction");
    e_act->add_option("--pred", eval_args.pred, "per-frame detection CSV, once per video")->required();
    e_act->add_option("--truth", eval_args.truth, "segment CSV start_s,end_s, once per video")->required();
    e_act->add_option("--window", eval_args.window, "smoothing window in seconds")->capture_default_str();
    e_act->add_option("--score", eval_args.score, "score at which a frame is active")->capture_default_str();
    e_act->add_option("--duration", eval_args.duration, "video length in seconds, once per video");

    CostArgs cost_args;
    auto* cost = app.add_subcommand("cost", "Annotation labour estimates");
    cost->require_subcommand(0, 1);
    cost->add_option("--hours", cost_args.hours, "annotation hours");
    cost->add_option("--rate", cost_args.rate, "hourly rate");
    cost->add_option("--images", cost_args.images, "image count");
    cost->add_option("--iph", cost_args.iph, "images annotated per hour");
    cost->add_option("--redundancy", cost_args.redundancy, "annotators per image")->capture_default_str();
    auto* c_exp = cost->add_subcommand("expert", "Expert cost at per-image rates");
    c_exp->add_option("--mid", cost_args.mid, "midwater image count")->required();
    c_exp->add_option("--benthic", cost_args.benthic, "benthic image count")->required();
    c_exp->add_option("--mid-rate", cost_args.mid_rate, "per midwater image")->capture_default_str();
    c_exp->add_option("--benthic-rate", cost_args.benthic_rate, "per benthic image")->capture_default_str();

    TaxonomyArgs tax_args;
    auto* tax = app.add_subcommand("taxonomy", "Inspect and validate the concept tree");
    tax->require_subcommand(1);
    auto* t_show = tax->add_subcommand("show", "Node with its parent, aliases and children");
    t_show->add_option("name", tax_args.name, "name or alias")->required();
    auto* t_desc = tax->add_subcommand("descendants", "Self-inclusive subtree");
    t_desc->add_option("name", tax_args.name, "name or alias")->required();
    auto* t_label = tax->add_subcommand("label", "Label of a node at a rank");
    t_label->add_option("name", tax_args.name, "name or alias")->required();
    t_label->add_option("--rank", tax_args.rank, "target rank")->capture_default_str();
    auto* t_val = tax->add_subcommand("validate", "Load the tree and optionally a supercategory map");
    t_val->add_option("--supercategories", tax_args.supercategories, "label<TAB>root1|root2 file");

    ExportArgs export_args;
    auto* exp = app.add_subcommand("export", "Write images and boxes in the ingest CSV format");
    exp->add_option("--out", export_args.out, "output CSV; --collection alone also writes its .meta");
    export_args.filters.attach(exp);

    std::vector<const char*> cargv;
    cargv.reserve(argv.size() + 1);
    if (argv.empty()) cargv.push_back("fn");
    for (const auto& a : argv) cargv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        report_error(err, "usage", e.what());
        err << app.help();
        return kValidation;
    }

    return guarded(err, [&]() -> int {
        Context ctx(resolve_config(flags, env), out, err);
        log::set_level(log::parse_level(ctx.config.log_level));

        if (*ingest) return cmd_ingest(ctx, ingest_args);
        if (*serve) return cmd_serve(ctx);
        if (*s_inst) return cmd_stats_instances(ctx, stats_args);
        if (*s_conc) return cmd_stats_concepts(ctx, stats_args);
        if (*s_size) return cmd_stats_sizes(ctx, stats_args);
        if (*s_samp) return cmd_stats_sample(ctx, stats_args);
        if (*s_cov) return cmd_stats_coverage(ctx, stats_args);
        if (*s_avg) return cmd_stats_average(ctx, stats_args);
        if (*e_box) return cmd_eval_boxes(ctx, eval_args);
        if (*e_act) return cmd_eval_activity(ctx, eval_args);
        if (*c_exp) return cmd_cost_expert(ctx, cost_args);
        if (*cost) return cmd_cost(ctx, cost_args);
        if (*t_show) return cmd_taxonomy_show(ctx, tax_args);
        if (*t_desc) return cmd_taxonomy_descendants(ctx, tax_args);
        if (*t_label) return cmd_taxonomy_label(ctx, tax_args);
        if (*t_val) return cmd_taxonomy_validate(ctx, tax_args);
        if (*exp) return cmd_export(ctx, export_args);
        throw UsageError("no command given");
    });
}

}  // namespace fn::cli
