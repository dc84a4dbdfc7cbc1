#pragma once

// Command-line front end. `execute` is kept separate from main() so the
// workflows can be driven in-process by the integration tests.

#include <dfdl/classifier.hpp>
#include <dfdl/complexity.hpp>
#include <dfdl/evaluation.hpp>
#include <dfdl/image.hpp>
#include <dfdl/manifest.hpp>
#include <dfdl/model_io.hpp>
#include <dfdl/pipeline.hpp>
#include <dfdl/train.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace dfdl::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

enum ExitCode : int { ok = 0, usage_error = 1, data_error = 2, numeric_error = 3 };

inline int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::numeric_failure:
    case ErrorCode::overflow: return numeric_error;
    default: return data_error;
    }
}

namespace detail {

inline std::string fmt_double(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::unwritable_path, "cannot write " + path.string());
    out << text;
    require(static_cast<bool>(out), ErrorCode::unwritable_path, "failed writing " + path.string());
}

inline void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec && fs::is_directory(dir), ErrorCode::unwritable_path,
            "cannot create directory " + dir.string());
}

/// Accumulates the run report written next to every command's outputs.
struct RunReport {
    std::string command;
    json config = json::object();
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    json metrics = json::object();
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void write(const fs::path& path)
    {
        outputs.push_back(path.string());
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json j{{"command", command}, {"config", config},       {"seed", seed},
               {"outputs", outputs}, {"metrics", metrics}, {"wall_time_s", wall}};
        write_text(path, j.dump(2) + "\n");
    }
};

inline bool is_matrix_file(const fs::path& p) { return p.extension() == ".csv"; }

/// Rows of a numeric CSV, one sample per row, returned as columns.
inline SampleMatrix read_sample_csv(const fs::path& path)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::file_not_found, "cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                require(used == cell.size(), ErrorCode::malformed_file,
                        "bad number '" + cell + "' in " + path.string());
            } catch (const std::logic_error&) {
                throw Error(ErrorCode::malformed_file, "bad number '" + cell + "' in " + path.string());
            }
        }
        require(rows.empty() || row.size() == rows.front().size(), ErrorCode::malformed_file,
                "ragged sample matrix " + path.string());
        rows.push_back(std::move(row));
    }
    require(!rows.empty(), ErrorCode::malformed_file, "empty sample matrix " + path.string());
    SampleMatrix Y(static_cast<Index>(rows.front().size()), static_cast<Index>(rows.size()));
    for (std::size_t n = 0; n < rows.size(); ++n)
        for (std::size_t i = 0; i < rows[n].size(); ++i)
            Y(static_cast<Index>(i), static_cast<Index>(n)) = rows[n][i];
    return Y;
}

inline std::string sample_csv(const SampleMatrix& Y)
{
    std::ostringstream os;
    os << std::setprecision(17);
    for (Index n = 0; n < Y.cols(); ++n) {
        for (Index i = 0; i < Y.rows(); ++i) os << (i ? "," : "") << Y(i, n);
        os << '\n';
    }
    return os.str();
}

inline Index side_from_dim(Index d)
{
    const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(d) / 3.0)));
    require(side >= 1 && patch_dim(side) == d, ErrorCode::invalid_argument,
            "model dimension " + std::to_string(d) + " is not 3 * side^2");
    return side;
}

inline Index resolve_positive(const DfdlModel& model, const std::string& label)
{
    return label.empty() ? 0 : model.class_index(label);
}

inline std::string confusion_csv(const ConfusionMatrix& cm, const DfdlModel& model)
{
    std::ostringstream os;
    os << "true_label,predicted_label,count,percent\n";
    for (Index r = 0; r < cm.class_count(); ++r)
        for (Index c = 0; c < cm.class_count(); ++c)
            os << model.classes[static_cast<std::size_t>(r)].label << ','
               << model.classes[static_cast<std::size_t>(c)].label << ',' << cm.counts(r, c) << ','
               << fmt_double(cm.percent(r, c)) << '\n';
    return os.str();
}

inline std::string roc_csv(const RocCurve& curve, const std::string& parameter)
{
    std::ostringstream os;
    os << parameter << ",false_alarm,miss\n";
    for (const auto& p : curve.points)
        os << fmt_double(p.parameter) << ',' << fmt_double(p.false_alarm) << ','
           << fmt_double(p.miss) << '\n';
    return os.str();
}

struct ClassifiedImage {
    fs::path path;
    Index truth = -1;
    LabelGrid grid;
};

inline std::vector<ClassifiedImage> classify_manifest(const DfdlModel& model, const Manifest& manifest,
                                                      Index side, bool require_known_labels)
{
    std::vector<ClassifiedImage> out;
    for (const auto& e : manifest.entries) {
        ClassifiedImage ci;
        ci.path = e.path;
        if (require_known_labels) ci.truth = model.class_index(e.label);
        ci.grid = classify_tiles(model, load_image(e.path), side);
        out.push_back(std::move(ci));
    }
    return out;
}

} // namespace detail

inline int run_train(const std::string& manifest_path, const std::string& out_path,
                     const TrainConfig& cfg, const std::string& threshold_manifest,
                     const std::string& positive_label)
{
    detail::RunReport report;
    report.command = "train";
    report.seed = cfg.seed;
    report.config = {{"manifest", manifest_path},         {"out", out_path},
                     {"patch_side", cfg.patch_side},      {"patches_per_class", cfg.patches_per_class},
                     {"k", cfg.k},                        {"lambda", cfg.lambda},
                     {"rho", cfg.rho},                    {"gamma", cfg.gamma},
                     {"max_iter", cfg.max_outer_iterations}, {"tol", cfg.tolerance},
                     {"odl_iter", cfg.odl_iterations},    {"threads", num_threads()},
                     {"threshold_manifest", threshold_manifest}, {"positive", positive_label}};

    const Manifest manifest = read_manifest(manifest_path);
    const auto labels = manifest.labels();
    require(labels.size() >= 2, ErrorCode::invalid_argument,
            "training needs at least 2 classes; manifest has " + std::to_string(labels.size()));

    std::vector<LabeledSamples> dataset;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::vector<ImageRGB> images;
        std::vector<SampleMatrix> matrices;
        for (const auto& e : manifest.entries) {
            if (e.label != labels[i]) continue;
            if (detail::is_matrix_file(e.path)) matrices.push_back(detail::read_sample_csv(e.path));
            else images.push_back(load_image(e.path));
        }
        Index total = 0;
        SampleMatrix patches;
        if (!images.empty()) {
            patches = extract_random_patches(images, cfg.patch_side, cfg.patches_per_class,
                                             split_seed(cfg.seed, 1000 + i));
            const auto zeros = zero_columns(patches);
            if (!zeros.empty())
                std::cerr << "warning: class '" << labels[i] << "' has " << zeros.size()
                          << " all-zero patches\n";
            total += patches.cols();
        }
        for (const auto& m : matrices) total += m.cols();
        const Index d = images.empty() ? matrices.front().rows() : patches.rows();
        SampleMatrix Y(d, total);
        Index offset = 0;
        if (!images.empty()) {
            Y.leftCols(patches.cols()) = patches;
            offset = patches.cols();
        }
        for (const auto& m : matrices) {
            require(m.rows() == d, ErrorCode::dimension_mismatch,
                    "class '" + labels[i] + "' mixes sample dimensions");
            Y.middleCols(offset, m.cols()) = m;
            offset += m.cols();
        }
        dataset.push_back({labels[i], std::move(Y)});
    }

    std::vector<ClassTrainResult> diagnostics;
    DfdlModel model = train_model(dataset, cfg, &diagnostics);

    json per_class = json::array();
    for (std::size_t i = 0; i < diagnostics.size(); ++i)
        per_class.push_back({{"label", labels[i]},
                             {"samples", dataset[i].samples.cols()},
                             {"sparsity", diagnostics[i].sparsity},
                             {"outer_iterations", diagnostics[i].outer_iterations},
                             {"converged", diagnostics[i].converged},
                             {"objective", diagnostics[i].objective}});
    report.metrics["classes"] = per_class;

    if (!threshold_manifest.empty()) {
        require(model.class_count() == 2, ErrorCode::invalid_argument,
                "threshold learning needs exactly 2 classes");
        const Index positive = detail::resolve_positive(model, positive_label);
        const Manifest tm = read_manifest(threshold_manifest);
        std::vector<std::pair<double, bool>> taus;
        const Index side = detail::side_from_dim(model.dim());
        for (const auto& ci : detail::classify_manifest(model, tm, side, true))
            taus.emplace_back(positive_fraction(ci.grid, positive), ci.truth == positive);
        model.theta = learn_threshold(taus, positive).theta;
        report.metrics["theta"] = *model.theta;
    }

    save_model(model, out_path);
    report.outputs.push_back(out_path);
    report.write(out_path + ".report.json");
    return ok;
}

inline int run_classify(const std::string& model_path, const std::string& manifest_path,
                        const std::string& out_path, const std::string& positive_label)
{
    detail::RunReport report;
    report.command = "classify";
    report.config = {{"model", model_path}, {"manifest", manifest_path}, {"out", out_path},
                     {"positive", positive_label}, {"threads", num_threads()}};
    const DfdlModel model = load_model(model_path);
    const Index side = detail::side_from_dim(model.dim());
    const Index positive = detail::resolve_positive(model, positive_label);
    const Manifest manifest = read_manifest(manifest_path);
    const bool use_threshold = model.class_count() == 2 && model.theta.has_value();

    std::ostringstream os;
    os << "path,label,predicted,tau\n";
    const auto images = detail::classify_manifest(model, manifest, side, false);
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto& ci = images[i];
        const double tau = positive_fraction(ci.grid, positive);
        Index predicted;
        if (use_threshold)
            predicted = threshold_decision(tau, *model.theta) ? positive : 1 - positive;
        else
            predicted = majority_label(ci.grid, model.class_count());
        os << manifest.entries[i].path.generic_string() << ',' << manifest.entries[i].label << ','
           << model.classes[static_cast<std::size_t>(predicted)].label << ','
           << detail::fmt_double(tau) << '\n';
    }
    detail::write_text(out_path, os.str());
    report.outputs.push_back(out_path);
    report.metrics["decision"] = use_threshold ? "threshold" : "majority";
    report.write(out_path + ".report.json");
    return ok;
}

inline int run_eval(const std::string& model_path, const std::string& manifest_path,
                    const std::string& mode, const std::string& out_dir,
                    const std::string& positive_label, int fixed_m, int connectivity)
{
    detail::RunReport report;
    report.command = "eval";
    report.config = {{"model", model_path},   {"manifest", manifest_path},
                     {"mode", mode},          {"out_dir", out_dir},
                     {"positive", positive_label}, {"m", fixed_m},
                     {"connectivity", connectivity}, {"threads", num_threads()}};
    const DfdlModel model = load_model(model_path);
    const Index side = detail::side_from_dim(model.dim());
    const Index positive = detail::resolve_positive(model, positive_label);
    const Manifest manifest = read_manifest(manifest_path);
    detail::ensure_dir(out_dir);
    const auto images = detail::classify_manifest(model, manifest, side, true);
    const fs::path dir(out_dir);

    std::vector<Index> truths;
    for (const auto& ci : images) truths.push_back(ci.truth);
    std::vector<Index> predictions;
    std::ostringstream labels_csv;

    if (mode == "threshold") {
        std::vector<double> taus;
        for (const auto& ci : images) taus.push_back(positive_fraction(ci.grid, positive));
        if (model.class_count() == 2) {
            const Index negative = 1 - positive;
            double theta;
            if (model.theta) {
                theta = *model.theta;
                report.metrics["theta_source"] = "model";
            } else {
                std::vector<std::pair<double, bool>> samples;
                for (std::size_t i = 0; i < images.size(); ++i)
                    samples.emplace_back(taus[i], truths[i] == positive);
                theta = learn_threshold(samples, positive).theta;
                report.metrics["theta_source"] = "learned";
            }
            report.metrics["theta"] = theta;
            for (double tau : taus) predictions.push_back(tau >= theta ? positive : negative);

            std::vector<SweepPoint> sweep;
            for (int step = 0; step <= 100; ++step) {
                SweepPoint pt;
                pt.parameter = step / 100.0;
                pt.truths = truths;
                for (double tau : taus) pt.predictions.push_back(tau >= pt.parameter ? positive : negative);
                sweep.push_back(std::move(pt));
            }
            const auto roc = roc_curve(sweep, positive);
            detail::write_text(dir / "roc.csv", detail::roc_csv(roc, "theta"));
            report.outputs.push_back((dir / "roc.csv").string());
        } else {
            for (const auto& ci : images) predictions.push_back(majority_label(ci.grid, model.class_count()));
        }
        labels_csv << "path,label,predicted,tau\n";
        for (std::size_t i = 0; i < images.size(); ++i)
            labels_csv << images[i].path.generic_string() << ','
                       << model.classes[static_cast<std::size_t>(truths[i])].label << ','
                       << model.classes[static_cast<std::size_t>(predictions[i])].label << ','
                       << detail::fmt_double(taus[i]) << '\n';
    } else {
        require(model.class_count() == 2, ErrorCode::invalid_argument,
                "mvp evaluation needs exactly 2 classes");
        const Index negative = 1 - positive;
        const auto conn = connectivity == 8 ? Connectivity::eight : Connectivity::four;
        std::vector<std::pair<LabelGrid, bool>> grids;
        for (const auto& ci : images) grids.emplace_back(ci.grid, ci.truth == positive);
        const Index m = fixed_m > 0 ? fixed_m : select_m_from_grids(grids, positive, 20, conn);
        report.metrics["m"] = m;
        report.metrics["m_source"] = fixed_m > 0 ? "flag" : "selected";

        std::vector<SweepPoint> sweep;
        for (Index mm = 1; mm <= 20; ++mm) {
            SweepPoint pt;
            pt.parameter = static_cast<double>(mm);
            pt.truths = truths;
            for (const auto& [grid, label] : grids)
                pt.predictions.push_back(detect_regions(grid, positive, mm, conn).positive ? positive
                                                                                         : negative);
            sweep.push_back(std::move(pt));
        }
        detail::write_text(dir / "roc.csv", detail::roc_csv(roc_curve(sweep, positive), "m"));
        report.outputs.push_back((dir / "roc.csv").string());

        labels_csv << "path,label,predicted,regions\n";
        for (std::size_t i = 0; i < images.size(); ++i) {
            const auto det = detect_regions(grids[i].first, positive, m, conn);
            predictions.push_back(det.positive ? positive : negative);
            labels_csv << images[i].path.generic_string() << ','
                       << model.classes[static_cast<std::size_t>(truths[i])].label << ','
                       << model.classes[static_cast<std::size_t>(predictions.back())].label << ','
                       << det.regions.size() << '\n';
        }
    }

    const auto cm = confusion_matrix(predictions, truths, model.class_count());
    detail::write_text(dir / "confusion.csv", detail::confusion_csv(cm, model));
    detail::write_text(dir / "labels.csv", labels_csv.str());
    report.outputs.push_back((dir / "confusion.csv").string());
    report.outputs.push_back((dir / "labels.csv").string());
    report.metrics["accuracy"] = cm.accuracy();
    report.write(dir / "report.json");
    return ok;
}

inline int run_mvp(const std::string& model_path, const std::string& image_path, int m,
                   const std::string& positive_label, const std::string& out_dir, int connectivity)
{
    detail::RunReport report;
    report.command = "mvp";
    report.config = {{"model", model_path}, {"image", image_path}, {"m", m},
                     {"positive", positive_label}, {"out_dir", out_dir},
                     {"connectivity", connectivity}, {"threads", num_threads()}};
    const DfdlModel model = load_model(model_path);
    require(model.class_count() == 2, ErrorCode::invalid_argument,
            "mvp detection needs exactly 2 classes");
    const Index side = detail::side_from_dim(model.dim());
    const Index positive = detail::resolve_positive(model, positive_label);
    const auto conn = connectivity == 8 ? Connectivity::eight : Connectivity::four;
    const auto det = detect_mvp(model, load_image(image_path), side, m, positive, conn);
    const auto& label = model.classes[static_cast<std::size_t>(det.positive ? positive : 1 - positive)].label;

    detail::ensure_dir(out_dir);
    const fs::path dir(out_dir);
    std::ostringstream os;
    os << "region,row,col\n";
    for (std::size_t r = 0; r < det.regions.size(); ++r)
        for (const auto& cell : det.regions[r].cells)
            os << r << ',' << cell.row << ',' << cell.col << '\n';
    detail::write_text(dir / "regions.csv", os.str());
    detail::write_text(dir / "label.csv", "image,label,regions\n" + image_path + "," + label + "," +
                                              std::to_string(det.regions.size()) + "\n");
    report.outputs = {(dir / "regions.csv").string(), (dir / "label.csv").string()};
    report.metrics = {{"label", label}, {"regions", det.regions.size()}};
    report.write(dir / "report.json");
    std::cout << label << '\n';
    return ok;
}

inline int run_complexity(const ComplexityParams& p, const std::vector<std::uint64_t>& qs,
                          const std::vector<std::string>& method_names, const std::string& out_path,
                          bool text)
{
    detail::RunReport report;
    report.command = "complexity";
    report.config = {{"c", p.c}, {"k", p.k}, {"n", p.N},      {"d", p.d},
                     {"l", p.L}, {"q", qs},  {"methods", method_names}, {"out", out_path}};
    std::vector<Method> methods;
    for (const auto& name : method_names) methods.push_back(parse_method(name));
    const auto table = complexity_table(p, qs, methods);
    std::cout << (text ? table.to_text() : table.to_csv());
    if (!out_path.empty()) {
        detail::write_text(out_path, table.to_csv());
        report.outputs.push_back(out_path);
        report.write(out_path + ".report.json");
    }
    return ok;
}

struct SynthOptions {
    std::string out_dir;
    std::string format = "images";
    Index classes = 2;
    Index side = 4;
    Index atoms = 8;
    Index sparsity = 2;
    double noise = 0.05;
    Index samples_per_class = 1000;
    Index images_per_class = 10;
    Index grid = 8;
    double mix = 0.2;
    std::vector<std::string> labels;
    std::uint64_t seed = 0;
};

inline int run_synth(SynthOptions opt)
{
    detail::RunReport report;
    report.command = "synth";
    report.seed = opt.seed;
    if (opt.labels.empty())
        for (Index i = 0; i < opt.classes; ++i) opt.labels.push_back("class" + std::to_string(i));
    require(static_cast<Index>(opt.labels.size()) == opt.classes, ErrorCode::invalid_argument,
            "--labels must name every class");
    require(opt.mix >= 0.0 && opt.mix <= 1.0, ErrorCode::invalid_argument, "--mix must be in [0,1]");
    report.config = {{"out_dir", opt.out_dir}, {"format", opt.format},
                     {"classes", opt.classes},  {"side", opt.side},
                     {"atoms", opt.atoms},      {"sparsity", opt.sparsity},
                     {"noise", opt.noise},      {"samples_per_class", opt.samples_per_class},
                     {"images_per_class", opt.images_per_class}, {"grid", opt.grid},
                     {"mix", opt.mix},          {"labels", opt.labels}};

    SyntheticSpec spec;
    spec.classes = opt.classes;
    spec.dim = patch_dim(opt.side);
    spec.atoms_per_class = opt.atoms;
    spec.samples_per_class = opt.samples_per_class;
    spec.sparsity = opt.sparsity;
    spec.noise = opt.noise;
    spec.seed = opt.seed;
    const SyntheticData data = generate_synthetic(spec);

    detail::ensure_dir(opt.out_dir);
    const fs::path dir(opt.out_dir);
    Manifest manifest;
    if (opt.format == "matrix") {
        for (Index i = 0; i < opt.classes; ++i) {
            const std::string name = opt.labels[static_cast<std::size_t>(i)] + ".csv";
            detail::write_text(dir / name, detail::sample_csv(data.classes[static_cast<std::size_t>(i)].samples));
            manifest.entries.push_back({name, opt.labels[static_cast<std::size_t>(i)]});
            report.outputs.push_back((dir / name).string());
        }
    } else {
        // Each image is a grid of tiles; a fixed share of tiles comes from
        // other classes. Sample values map to pixels as 0.5 + 0.25 x.
        const Index cells = opt.grid * opt.grid;
        const auto foreign = static_cast<Index>(std::llround(opt.mix * static_cast<double>(cells)));
        for (Index i = 0; i < opt.classes; ++i) {
            for (Index img = 0; img < opt.images_per_class; ++img) {
                const std::uint64_t image_seed = split_seed(opt.seed, 10000 + i * 100000 + img);
                std::mt19937_64 rng(image_seed);
                std::vector<Index> cell_class(static_cast<std::size_t>(cells), i);
                std::vector<Index> order(static_cast<std::size_t>(cells));
                std::iota(order.begin(), order.end(), Index{0});
                std::shuffle(order.begin(), order.end(), rng);
                if (opt.classes > 1)
                    for (Index f = 0; f < foreign; ++f) {
                        std::uniform_int_distribution<Index> other(0, opt.classes - 2);
                        const Index o = other(rng);
                        cell_class[static_cast<std::size_t>(order[static_cast<std::size_t>(f)])] =
                            o >= i ? o + 1 : o;
                    }
                const auto tiles = draw_synthetic_samples(data.dictionaries, cells, opt.sparsity,
                                                          opt.noise, split_seed(image_seed, 1));
                PatchGrid grid{opt.grid, opt.grid, opt.side};
                SampleMatrix pixels(spec.dim, cells);
                for (Index cell = 0; cell < cells; ++cell) {
                    const Index cls = cell_class[static_cast<std::size_t>(cell)];
                    pixels.col(cell) =
                        (0.5 + 0.25 * tiles[static_cast<std::size_t>(cls)].samples.col(cell).array())
                            .cwiseMax(0.0)
                            .cwiseMin(1.0);
                }
                const std::string name = opt.labels[static_cast<std::size_t>(i)] + "_" +
                                         std::to_string(img) + ".ppm";
                save_ppm(assemble_tiles(grid, pixels), dir / name);
                manifest.entries.push_back({name, opt.labels[static_cast<std::size_t>(i)]});
                report.outputs.push_back((dir / name).string());
            }
        }
    }
    write_manifest(manifest, dir / "manifest.csv");
    report.outputs.push_back((dir / "manifest.csv").string());
    report.write(dir / "report.json");
    return ok;
}

/// Parses argv and runs one subcommand. Returns the process exit status.
inline int execute(std::vector<std::string> args, std::ostream& err = std::cerr)
{
    CLI::App app{"Discriminative feature-oriented dictionary learning toolkit", "dfdl"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: DFDL_THREADS or 1)")
        ->check(CLI::NonNegativeNumber);

    TrainConfig cfg;
    std::string manifest, out, model_path, out_dir, mode = "threshold", positive, image;
    std::string threshold_manifest;
    int m = 0;
    int connectivity = 4;
    out_dir = ".";

    auto* train = app.add_subcommand("train", "Train per-class dictionaries from a manifest");
    train->add_option("--manifest", manifest, "path,label CSV of images or sample matrices")
        ->required();
    train->add_option("--out", out, "Model file to write")->required();
    train->add_option("--patch-side", cfg.patch_side, "Patch side in pixels")->capture_default_str();
    train->add_option("--patches-per-class", cfg.patches_per_class, "Random patches per class")
        ->capture_default_str();
    train->add_option("--k", cfg.k, "Atoms per class")->capture_default_str();
    train->add_option("--lambda", cfg.lambda, "l1 weight of the warm start")->capture_default_str();
    train->add_option("--rho", cfg.rho, "Weight of the complementary-class term")->capture_default_str();
    train->add_option("--gamma", cfg.gamma, "l1 weight of the patch classifier")->capture_default_str();
    train->add_option("--max-iter", cfg.max_outer_iterations, "Maximum outer iterations")
        ->capture_default_str();
    train->add_option("--tol", cfg.tolerance, "Relative objective tolerance")->capture_default_str();
    train->add_option("--odl-iter", cfg.odl_iterations, "Warm-start alternations")->capture_default_str();
    train->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    train->add_option("--threshold-manifest", threshold_manifest,
                      "Images used to learn the proportion threshold (2 classes)");
    train->add_option("--positive", positive, "Positive (healthy) class label; default first class");

    auto* classify = app.add_subcommand("classify", "Label every image of a manifest");
    classify->add_option("--model", model_path, "Model file")->required();
    classify->add_option("--manifest", manifest, "path,label CSV of images")->required();
    classify->add_option("--out", out, "Per-image labels CSV")->required();
    classify->add_option("--positive", positive, "Positive class label; default first class");

    auto* eval = app.add_subcommand("eval", "Confusion matrix and ROC over a labeled manifest");
    eval->add_option("--model", model_path, "Model file")->required();
    eval->add_option("--manifest", manifest, "path,label CSV of images")->required();
    eval->add_option("--mode", mode, "Image decision rule")
        ->check(CLI::IsMember({"threshold", "mvp"}))
        ->capture_default_str();
    eval->add_option("--out-dir", out_dir, "Output directory")->required();
    eval->add_option("--positive", positive, "Positive class label; default first class");
    eval->add_option("--m", m, "Fixed region size for mvp mode (default: selected on the manifest)")
        ->check(CLI::NonNegativeNumber);
    eval->add_option("--connectivity", connectivity, "Tile adjacency (4 or 8)")
        ->check(CLI::IsMember({4, 8}))
        ->capture_default_str();

    auto* mvp = app.add_subcommand("mvp", "Detect connected positive regions in one image");
    mvp->add_option("--model", model_path, "Model file")->required();
    mvp->add_option("--image", image, "PPM image")->required();
    mvp->add_option("--m", m, "Minimum region size")->required()->check(CLI::PositiveNumber);
    mvp->add_option("--positive", positive, "Region class label; default first class");
    mvp->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    mvp->add_option("--connectivity", connectivity, "Tile adjacency (4 or 8)")
        ->check(CLI::IsMember({4, 8}))
        ->capture_default_str();

    ComplexityParams cp;
    std::vector<std::uint64_t> qs;
    std::vector<std::string> methods{"dfdl", "lc-ksvd", "nayak", "fddl"};
    auto* complexity = app.add_subcommand("complexity", "Operation-count table");
    complexity->add_option("--c", cp.c, "Classes")->required()->check(CLI::PositiveNumber);
    complexity->add_option("--k", cp.k, "Atoms per class")->required()->check(CLI::PositiveNumber);
    complexity->add_option("--n", cp.N, "Samples per class")->required()->check(CLI::PositiveNumber);
    complexity->add_option("--d", cp.d, "Data dimension")->required()->check(CLI::PositiveNumber);
    complexity->add_option("--l", cp.L, "Sparsity level")->required()->check(CLI::PositiveNumber);
    complexity->add_option("--q", qs, "Comma-separated l1 iteration counts")
        ->required()
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    complexity->add_option("--methods", methods, "Comma-separated methods")
        ->delimiter(',')
        ->check(CLI::IsMember({"batch-omp", "batch-omp-full", "dfdl", "lc-ksvd", "nayak", "fddl"}))
        ->capture_default_str();
    complexity->add_option("--out", out, "CSV file to write");
    bool text_table = false;
    complexity->add_flag("--text", text_table, "Print an aligned text table instead of CSV");

    SynthOptions synth_opt;
    auto* synth = app.add_subcommand("synth", "Write a seeded synthetic dataset and manifest");
    synth->add_option("--out-dir", synth_opt.out_dir, "Output directory")->required();
    synth->add_option("--format", synth_opt.format, "images (PPM tiles) or matrix (CSV samples)")
        ->check(CLI::IsMember({"images", "matrix"}))
        ->capture_default_str();
    synth->add_option("--classes", synth_opt.classes, "Classes")->capture_default_str();
    synth->add_option("--side", synth_opt.side, "Patch side; d = 3 side^2")->capture_default_str();
    synth->add_option("--atoms", synth_opt.atoms, "True atoms per class")->capture_default_str();
    synth->add_option("--sparsity", synth_opt.sparsity, "Atoms per sample")->capture_default_str();
    synth->add_option("--noise", synth_opt.noise, "Gaussian noise std")->capture_default_str();
    synth->add_option("--samples-per-class", synth_opt.samples_per_class, "Samples (matrix format)")
        ->capture_default_str();
    synth->add_option("--images-per-class", synth_opt.images_per_class, "Images (images format)")
        ->capture_default_str();
    synth->add_option("--grid", synth_opt.grid, "Tiles per image side")->capture_default_str();
    synth->add_option("--mix", synth_opt.mix, "Share of tiles from other classes")->capture_default_str();
    synth->add_option("--labels", synth_opt.labels, "Comma-separated class labels")->delimiter(',');
    synth->add_option("--seed", synth_opt.seed, "Random seed")->capture_default_str();

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    }

    struct RestoreThreads {
        int saved = dfdl::detail::thread_setting();
        ~RestoreThreads() { set_num_threads(saved); }
    } restore;
    if (threads > 0) set_num_threads(threads);

    try {
        if (*train) return run_train(manifest, out, cfg, threshold_manifest, positive);
        if (*classify) return run_classify(model_path, manifest, out, positive);
        if (*eval) return run_eval(model_path, manifest, mode, out_dir, positive, m, connectivity);
        if (*mvp) return run_mvp(model_path, image, m, positive, out_dir, connectivity);
        if (*complexity) return run_complexity(cp, qs, methods, out, text_table);
        if (*synth) return run_synth(synth_opt);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return numeric_error;
    }
    return usage_error;
}

} // namespace dfdl::cli
