#include "dispref/cli/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "dispref/autodiff/checkpoint.hpp"
#include "dispref/blackbox/pipeline.hpp"
#include "dispref/cli/run_config.hpp"
#include "dispref/core/image_io.hpp"
#include "dispref/eval/pointcloud.hpp"
#include "dispref/eval/report.hpp"
#include "dispref/net/refine.hpp"
#include "dispref/train/synth.hpp"
#include "dispref/train/trainer.hpp"

namespace fs = std::filesystem;

namespace dispref {
namespace {

// DISPREF_LOG=quiet silences the config echo and progress lines; debug adds per-step losses.
enum class Verbosity { quiet, info, debug };

Verbosity verbosity() {
    const char* v = std::getenv("DISPREF_LOG");
    if (!v) return Verbosity::info;
    const std::string s = v;
    if (s == "quiet" || s == "0") return Verbosity::quiet;
    if (s == "debug" || s == "2") return Verbosity::debug;
    return Verbosity::info;
}

struct Options {
    std::string config_file;
    std::map<std::string, std::string> overrides;

    // shared paths
    std::string left, right, raw, out, ckpt, gt, pred, image, disp, csv, out_dir;
    int out_w = 0, out_h = 0;
    bool kappa_aware = false;
    bool ascii = false;
};

RunConfig resolve(const Options& o) {
    RunConfig cfg;
    if (!o.config_file.empty()) cfg.merge_file(o.config_file);
    for (const auto& [k, v] : o.overrides) cfg.set(k, v);
    cfg.train.seed = cfg.seed;
    return cfg;
}

void log_config(const RunConfig& cfg, const char* command, std::ostream& err) {
    if (verbosity() == Verbosity::quiet) return;
    err << "# dispref " << command << " (seed " << cfg.seed << ")\n" << cfg.to_ini();
}

StereoPair load_pair(const Options& o) { return StereoPair(read_image(o.left), read_image(o.right)); }

int cmd_match(const Options& o, std::ostream& err) {
    const RunConfig cfg = resolve(o);
    log_config(cfg, "match", err);
    const StereoPair pair = load_pair(o);
    if (!pair.balanced() && !o.kappa_aware)
        throw ConfigError("left and right sizes differ; pass --kappa-aware to match an unbalanced pair");
    write_disparity_pfm(o.out, run_blackbox(pair, cfg.blackbox()));
    return kExitOk;
}

int cmd_refine(const Options& o, std::ostream& err) {
    const RunConfig cfg = resolve(o);
    log_config(cfg, "refine", err);
    const StereoPair pair = load_pair(o);
    const DisparityMap raw = read_disparity_pfm(o.raw);
    if (raw.width() != pair.left().width() || raw.height() != pair.left().height())
        throw ConfigError("raw disparity is " + std::to_string(raw.width()) + "x" + std::to_string(raw.height()) +
                          ", left image is " + std::to_string(pair.left().width()) + "x" +
                          std::to_string(pair.left().height()));
    const RefinementModel model = RefinementModel::load(o.ckpt);
    const int w = o.out_w > 0 ? o.out_w : pair.left().width();
    const int h = o.out_h > 0 ? o.out_h : pair.left().height();
    write_disparity_pfm(o.out, refine_grid(pair, raw, model, w, h));
    return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
    RunConfig cfg = resolve(o);
    cfg.train.checkpoint = o.ckpt;
    log_config(cfg, "train", err);
    {
        std::ofstream ini(o.ckpt + ".run.ini");
        if (!ini) throw IoError("cannot write " + o.ckpt + ".run.ini");
        ini << cfg.to_ini();
    }
    RefinementModel model(cfg.net, cfg.seed);
    const Verbosity v = verbosity();
    const long every = std::max<long>(1, cfg.train.steps / 20);
    train_epochs(model, cfg.train, [&](const TrainLogRow& r) {
        if (v == Verbosity::quiet) return;
        if (v == Verbosity::debug || (r.step + 1) % every == 0 || r.val_epe) {
            out << "step " << r.step + 1 << "/" << cfg.train.steps << "  loss " << r.loss.total << "  ce "
                << r.loss.ce_term << "  offset " << r.loss.offset_term;
            if (r.val_epe) out << "  val_epe " << *r.val_epe;
            out << '\n';
        }
    });
    return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = resolve(o);
    log_config(cfg, "eval", err);
    const DisparityMap gt = read_disparity_pfm(o.gt);
    const DisparityMap pred = read_disparity_pfm(o.pred);
    const DisparityMap raw = o.raw.empty() ? pred : read_disparity_pfm(o.raw);
    for (const DisparityMap* m : {&pred, &raw})
        if (m->width() != gt.width() || m->height() != gt.height())
            throw ConfigError("prediction and ground truth sizes differ");
    const ComparisonReport rep = compare_report(raw, pred, gt);
    out << to_text(rep);
    if (!o.csv.empty()) write_report_csv(o.csv, rep);
    return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& err) {
    const RunConfig cfg = resolve(o);
    log_config(cfg, "synth", err);
    const SynthScene s =
        synth_scene_unbalanced(cfg.seed, cfg.synth_width, cfg.synth_height, cfg.synth_d_max, cfg.synth_kappa);
    const fs::path dir = o.out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string());
    write_png(dir / "left.png", s.left);
    write_png(dir / "right.png", s.right);
    write_disparity_pfm(dir / "gt.pfm", s.d_gt);
    write_png(dir / "occlusion.png", s.occluded);
    return kExitOk;
}

int cmd_export_ply(const Options& o, std::ostream& out, std::ostream& err) {
    RunConfig cfg = resolve(o);
    log_config(cfg, "export-ply", err);
    const DisparityMap d = read_disparity_pfm(o.disp);
    const PixelGrid rgb = read_image(o.image);
    if (rgb.width() != d.width() || rgb.height() != d.height())
        throw ConfigError("image and disparity sizes differ");
    if (cfg.camera_center_auto) {
        cfg.camera.cx = 0.5 * (d.width() - 1);
        cfg.camera.cy = 0.5 * (d.height() - 1);
    }
    const std::size_t n =
        export_pointcloud(d, rgb, cfg.camera, o.out, o.ascii ? PlyFormat::ascii : PlyFormat::binary_little_endian);
    out << n << " vertices written to " << o.out << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Continuous disparity refinement of stereo matcher output"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Describe every subcommand and configuration key");
    Options o;

    app.add_option("--config", o.config_file, "INI configuration file");
    std::map<std::string, std::string> raw_overrides;
    for (const auto& key : RunConfig::keys())
        app.add_option("--" + key.name, raw_overrides[key.name], key.help)->group("Configuration");

    auto* match = app.add_subcommand("match", "Run the stereo matcher, write a raw disparity PFM");
    match->add_option("--left", o.left, "left image")->required();
    match->add_option("--right", o.right, "right image")->required();
    match->add_option("--out", o.out, "output PFM")->required();
    match->add_option("--dmax", raw_overrides["blackbox.d_max"], "search range (left pixels)");
    match->add_option("--mode", raw_overrides["blackbox.mode"], "sgm or ad_census");
    match->add_flag("--kappa-aware", o.kappa_aware, "accept a lower-resolution right image");

    auto* refine = app.add_subcommand("refine", "Refine a raw disparity map at any output resolution");
    refine->add_option("--left", o.left, "left image")->required();
    refine->add_option("--right", o.right, "right image")->required();
    refine->add_option("--raw", o.raw, "raw disparity PFM at left resolution")->required();
    refine->add_option("--ckpt", o.ckpt, "model checkpoint")->required();
    refine->add_option("--out-w", o.out_w, "output width (default: left width)");
    refine->add_option("--out-h", o.out_h, "output height (default: left height)");
    refine->add_option("--out", o.out, "output PFM")->required();

    auto* train = app.add_subcommand("train", "Train a refinement model on synthetic scenes");
    train->add_option("--ckpt", o.ckpt, "checkpoint to write")->required();
    train->add_option("--steps", raw_overrides["train.steps"], "optimizer steps");
    train->add_option("--log", raw_overrides["train.log_csv"], "metrics CSV");
    train->add_option("--seed", raw_overrides["run.seed"], "run seed");
    train->add_option("--head", raw_overrides["net.head"], "classify_offset or l1_regression");

    auto* eval = app.add_subcommand("eval", "Score a disparity map against ground truth");
    eval->add_option("--pred", o.pred, "refined (or any) disparity PFM")->required();
    eval->add_option("--gt", o.gt, "ground-truth PFM")->required();
    eval->add_option("--raw", o.raw, "raw disparity PFM for the comparison row (default: --pred)");
    eval->add_option("--csv", o.csv, "write the report as CSV");

    auto* synth = app.add_subcommand("synth", "Render a synthetic stereo scene");
    synth->add_option("--out-dir", o.out_dir, "output directory")->required();
    synth->add_option("--seed", raw_overrides["run.seed"], "scene seed");
    synth->add_option("--width", raw_overrides["synth.width"], "scene width");
    synth->add_option("--height", raw_overrides["synth.height"], "scene height");
    synth->add_option("--dmax", raw_overrides["synth.d_max"], "largest disparity");
    synth->add_option("--kappa", raw_overrides["synth.kappa"], "right view downsampling factor");

    auto* ply = app.add_subcommand("export-ply", "Convert a disparity map to a colored point cloud");
    ply->add_option("--disp", o.disp, "disparity PFM")->required();
    ply->add_option("--image", o.image, "color image at the disparity resolution")->required();
    ply->add_option("--out", o.out, "output PLY")->required();
    ply->add_option("--focal", raw_overrides["camera.focal"], "focal length (px)");
    ply->add_option("--baseline", raw_overrides["camera.baseline"], "baseline (m)");
    ply->add_flag("--ascii", o.ascii, "ASCII instead of binary PLY");

    for (auto* sub : {match, refine, train, eval, synth, ply}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    for (const auto& [k, v] : raw_overrides)
        if (!v.empty()) o.overrides[k] = v;

    try {
        if (*match) return cmd_match(o, err);
        if (*refine) return cmd_refine(o, err);
        if (*train) return cmd_train(o, out, err);
        if (*eval) return cmd_eval(o, out, err);
        if (*synth) return cmd_synth(o, err);
        if (*ply) return cmd_export_ply(o, out, err);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kExitDivergence;
    } catch (const std::domain_error& e) {  // ConfigError, CheckpointMismatch, shape contracts
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace dispref
