// geolmk: batch command-line front end.
//
// Exit codes: 0 success, 2 validation / parse error, 1 internal error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "geolmk/edt.hpp"
#include "geolmk/error.hpp"
#include "geolmk/geodesic.hpp"
#include "geolmk/io.hpp"
#include "geolmk/metrics.hpp"
#include "geolmk/netspec.hpp"
#include "geolmk/phantom.hpp"
#include "geolmk/postprocess.hpp"
#include "geolmk/seqlmk.hpp"

namespace fs = std::filesystem;
using namespace geolmk;
using io::json;

namespace {

int env_threads(int fallback) {
    if (const char* s = std::getenv("GEOLMK_THREADS")) {
        try {
            const int n = std::stoi(s);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
        throw ValidationError("GEOLMK_THREADS: expected a positive integer, got \"" + std::string(s) + "\"");
    }
    return fallback;
}

Connectivity connectivity_flag(int n) {
    auto c = parse_connectivity(n);
    if (!c) throw ValidationError("--connectivity: expected 6 or 26, got " + std::to_string(n));
    return *c;
}

std::vector<LandmarkName> parse_names(const std::vector<std::string>& raw) {
    std::vector<LandmarkName> out;
    for (const auto& s : raw) {
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            auto n = parse_landmark_name(tok);
            if (!n) throw ValidationError("--names: unknown landmark \"" + tok + "\"");
            out.push_back(*n);
        }
    }
    return out;
}

Spacing parse_spacing(const std::string& s) {
    std::stringstream ss(s);
    std::string tok;
    std::vector<double> v;
    while (std::getline(ss, tok, ',')) {
        try {
            v.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ValidationError("--spacing: \"" + tok + "\" is not a number");
        }
    }
    if (v.size() != 3) throw ValidationError("--spacing: expected sx,sy,sz");
    Spacing sp{v[0], v[1], v[2]};
    validate_spacing(sp);
    return sp;
}

void emit_json(const json& j, const std::string& out) {
    const std::string text = j.dump(2) + "\n";
    if (out.empty() || out == "-") {
        std::cout << text;
    } else {
        io::write_text(out, text);
    }
}

std::string fmt(double d) {
    std::ostringstream os;
    os.precision(6);
    os << d;
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geodesic landmarking toolkit: distance transforms, geodesic maps, landmark encodings, metrics"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    int threads = 0;
    auto add_threads = [&](CLI::App* c) {
        c->add_option("--threads", threads, "Worker threads (default: $GEOLMK_THREADS or 1)")->check(CLI::PositiveNumber);
    };

    // phantom
    std::string spec_path, out_path, lm_path, labeled_path;
    auto* phantom = app.add_subcommand("phantom", "Generate a synthetic mandible mask and its landmarks");
    phantom->add_option("--spec", spec_path, "Phantom spec JSON (omitted fields take defaults)")->check(CLI::ExistingFile);
    phantom->add_option("-o,--output", out_path, "Output mask (.gvol)")->required();
    phantom->add_option("--landmarks", lm_path, "Output landmark JSON");
    phantom->add_option("--labeled", labeled_path, "Output 3x3x3 labelled landmark volume (.gvol)");

    // edt / sdt
    std::string in_path;
    auto* edt = app.add_subcommand("edt", "Unsigned Euclidean distance to the background, in mm");
    auto* sdt = app.add_subcommand("sdt", "Signed distance: positive inside, negative outside, in mm");
    for (auto* c : {edt, sdt}) {
        c->add_option("-i,--input", in_path, "Input mask (.gvol)")->required();
        c->add_option("-o,--output", out_path, "Output f64 field (.gvol)")->required();
        add_threads(c);
    }

    // geodesic
    std::string outdir;
    std::vector<std::string> names_raw;
    int conn = 26;
    double snap_limit = 10.0;
    auto* geo = app.add_subcommand("geodesic", "One geodesic distance map per landmark, written as <outdir>/<name>.gvol");
    geo->add_option("-i,--input", in_path, "Input mask (.gvol)")->required();
    geo->add_option("--landmarks", lm_path, "Landmark JSON")->required();
    geo->add_option("--outdir", outdir, "Output directory")->required();
    geo->add_option("--names", names_raw, "Comma-separated landmark names (default: present sparse landmarks)");
    geo->add_option("--connectivity", conn, "Voxel connectivity, 6 or 26")->capture_default_str();
    geo->add_option("--snap-limit", snap_limit, "Largest snap distance for off-mask landmarks, mm")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    add_threads(geo);

    // fuse
    std::vector<std::string> inputs;
    auto* fuse = app.add_subcommand("fuse", "Per-voxel minimum of geodesic maps");
    fuse->add_option("inputs", inputs, "Input maps (.gvol)")->required();
    fuse->add_option("-o,--output", out_path, "Output fused map (.gvol)")->required();

    // quantize
    double sbin = 0.0;
    bool auto_sbin = false;
    std::string mask_path;
    auto* quant = app.add_subcommand("quantize", "Quantize a geodesic map to classes 0..20 (background 255)");
    quant->add_option("-i,--input", in_path, "Input geodesic map (.gvol)")->required();
    quant->add_option("-o,--output", out_path, "Output u8 class map (.gvol)")->required();
    auto* sbin_opt = quant->add_option("--sbin", sbin, "Bin width in mm per class")->check(CLI::PositiveNumber);
    auto* auto_opt = quant->add_flag("--auto-sbin", auto_sbin, "Bin width = largest finite distance / 20");
    sbin_opt->excludes(auto_opt);
    quant->add_option("--mask", mask_path, "Mask; unreachable foreground becomes class 20 instead of background");

    // decode-landmarks
    auto* decode = app.add_subcommand("decode-landmarks", "Recover sparsely-spaced landmarks from a fused map");
    decode->add_option("-i,--input", in_path, "Quantized (u8) or unquantized (f64) fused map")->required();
    decode->add_option("--mask", mask_path, "Mask (.gvol)")->required();
    decode->add_option("-o,--output", out_path, "Output landmark JSON (default: stdout)");
    decode->add_option("--names", names_raw, "Expected names (default: Me,CdL,CdR,CorL,CorR)");
    decode->add_option("--connectivity", conn, "Connectivity the map was built with, 6 or 26")->capture_default_str();

    // extract-seq / decode-seq / pca-augment
    auto* extract = app.add_subcommand("extract-seq", "Boundary sequence of the sagittal slice through Menton");
    extract->add_option("--mask", mask_path, "Mask (.gvol)")->required();
    extract->add_option("--landmarks", lm_path, "Landmark JSON")->required();
    extract->add_option("-o,--output", out_path, "Output sequence JSON (default: stdout)");

    std::size_t seq_index = 0;
    auto* decode_seq = app.add_subcommand("decode-seq", "Closely-spaced landmarks from a boundary sequence");
    decode_seq->add_option("-i,--input", in_path, "Sequence JSON")->required();
    decode_seq->add_option("--index", seq_index, "Sequence to decode when the file holds several")->capture_default_str();
    decode_seq->add_option("-o,--output", out_path, "Output landmark JSON (default: stdout)");

    int count = 1;
    double sigma_cap = 1.0;
    std::uint64_t seed = 1;
    auto* pca = app.add_subcommand("pca-augment", "Synthesize boundary sequences from a PCA shape model");
    pca->add_option("-i,--input", inputs, "Training sequence JSON files")->required();
    pca->add_option("--count", count, "Number of sequences to synthesize")->capture_default_str()->check(CLI::PositiveNumber);
    pca->add_option("--sigma-cap", sigma_cap, "Coefficient i drawn uniformly from +-sigma_cap * sigma_i")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    pca->add_option("--seed", seed, "Random seed")->capture_default_str();
    pca->add_option("-o,--output", out_path, "Output sequence JSON (default: stdout)");

    // postprocess
    bool largest = false, fill = false;
    auto* post = app.add_subcommand("postprocess", "Largest connected component and/or 3D hole fill (both when neither flag is set)");
    post->add_option("-i,--input", in_path, "Input mask (.gvol)")->required();
    post->add_option("-o,--output", out_path, "Output mask (.gvol)")->required();
    post->add_flag("--largest-cc", largest, "Keep the largest connected component");
    post->add_flag("--fill", fill, "Fill cavities not connected to the border");
    post->add_option("--connectivity", conn, "Component connectivity, 6 or 26")->capture_default_str();

    // eval-seg / eval-landmarks
    std::string pred_path, gt_path, csv_path, case_id = "case";
    double hd_pct = 100.0;
    bool as_json = false;
    auto* eval_seg = app.add_subcommand("eval-seg", "DSC, IoU, sensitivity, specificity and Hausdorff distance");
    eval_seg->add_option("--pred", pred_path, "Predicted mask (.gvol)")->required();
    eval_seg->add_option("--gt", gt_path, "Ground-truth mask (.gvol)")->required();
    eval_seg->add_option("--hd-percentile", hd_pct, "Hausdorff percentile (100 = maximum)")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 100.0));

    std::string spacing_str;
    auto* eval_lm = app.add_subcommand("eval-landmarks", "Landmark errors in voxels and mm, 3x3x3 detection box");
    eval_lm->add_option("--pred", pred_path, "Predicted landmark JSON")->required();
    eval_lm->add_option("--gt", gt_path, "Ground-truth landmark JSON")->required();
    auto* sp_opt = eval_lm->add_option("--spacing", spacing_str, "Voxel spacing sx,sy,sz in mm (default 1,1,1)");
    auto* sp_mask = eval_lm->add_option("--mask", mask_path, "Take the spacing from this volume's header");
    sp_opt->excludes(sp_mask);
    for (auto* c : {eval_seg, eval_lm}) {
        c->add_flag("--json", as_json, "Machine-readable JSON output");
        c->add_option("--csv", csv_path, "Also write a one-row report CSV");
        c->add_option("--case-id", case_id, "Case id for the CSV row")->capture_default_str();
    }

    // netspec
    std::string arch = "tiramisu";
    int growth = 16;
    auto* net = app.add_subcommand("netspec", "Feature-map and parameter ledger of a network architecture");
    net->add_option("--arch", arch, "Architecture")->check(CLI::IsMember({"tiramisu", "unet", "lstm"}))->capture_default_str();
    net->add_option("--growth-rate", growth, "Dense-block growth rate k (tiramisu)")->capture_default_str();
    net->add_flag("--json", as_json, "Machine-readable JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const int n_threads = threads > 0 ? threads : env_threads(1);

        if (*phantom) {
            PhantomSpec spec;
            if (!spec_path.empty()) spec = io::phantom_spec_from_json(json::parse(io::read_text(spec_path)));
            const Phantom p = generate_phantom(spec);
            io::write_mask(p.mask, out_path);
            if (!lm_path.empty()) io::write_landmarks_json(p.landmarks, lm_path);
            if (!labeled_path.empty()) {
                io::write_volume(io::write_landmarks_labeled_volume(p.landmarks, p.mask.dims(), p.mask.spacing()),
                                 labeled_path);
            }
        } else if (*edt || *sdt) {
            const BinaryMask m = io::read_mask(in_path);
            io::write_volume(*edt ? ltdt(m, n_threads) : sltdt(m, n_threads), out_path);
        } else if (*geo) {
            const BinaryMask m = io::read_mask(in_path);
            const LandmarkSet lm = io::read_landmarks_json(lm_path);
            std::vector<LandmarkName> names = parse_names(names_raw);
            if (names.empty()) {
                for (auto n : kSparseLandmarks)
                    if (lm.present(n)) names.push_back(n);
                if (names.empty()) throw ValidationError("--landmarks: no present sparsely-spaced landmark");
            }
            GeodesicOptions opts;
            opts.connectivity = connectivity_flag(conn);
            opts.snap_limit_mm = snap_limit;
            const int geo_threads =
                threads > 0 ? threads : env_threads(static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
            const auto results = geodesic_maps(m, lm, names, opts, geo_threads);
            fs::create_directories(outdir);
            for (std::size_t i = 0; i < results.size(); ++i) {
                const auto& r = results[i];
                if (r.snap) {
                    std::cerr << landmark_name(names[i]) << ": snapped (" << r.snap->requested.i << ','
                              << r.snap->requested.j << ',' << r.snap->requested.k << ") -> (" << r.snap->snapped.i
                              << ',' << r.snap->snapped.j << ',' << r.snap->snapped.k << "), "
                              << fmt(r.snap->distance_mm) << " mm\n";
                }
                io::write_geodesic_map(r.map, fs::path(outdir) / (std::string(landmark_name(names[i])) + ".gvol"));
            }
        } else if (*fuse) {
            std::vector<GeodesicMap> maps;
            for (const auto& p : inputs) maps.push_back(io::read_geodesic_map(p));
            io::write_geodesic_map(fuse_maps(maps), out_path);
        } else if (*quant) {
            if (!auto_sbin && sbin <= 0) throw ValidationError("quantize: one of --sbin or --auto-sbin is required");
            const GeodesicMap g = io::read_geodesic_map(in_path);
            const double w = auto_sbin ? auto_bin_width(g) : sbin;
            const QuantizedGeodesicMap q =
                mask_path.empty() ? quantize(g, w) : quantize(g, w, io::read_mask(mask_path));
            io::write_quantized_map(q, out_path);
        } else if (*decode) {
            const BinaryMask m = io::read_mask(mask_path);
            std::vector<LandmarkName> names = parse_names(names_raw);
            if (names.empty()) names.assign(kSparseLandmarks.begin(), kSparseLandmarks.end());
            DecodeOptions opts;
            opts.connectivity = connectivity_flag(conn);
            io::LoadedVolume lv = io::read_volume(in_path);
            LandmarkSet lm;
            if (std::holds_alternative<Volume<std::uint8_t>>(lv.volume)) {
                lm = decode_landmarks(io::read_quantized_map(in_path), m, names, opts);
            } else {
                lm = decode_landmarks(io::read_geodesic_map(in_path), m, names, opts);
            }
            emit_json(io::landmarks_to_json(lm), out_path);
        } else if (*extract) {
            const BoundarySequence s = extract_boundary_sequence(io::read_mask(mask_path), io::read_landmarks_json(lm_path));
            emit_json(io::sequence_to_json(s), out_path);
        } else if (*decode_seq) {
            const auto seqs = io::read_sequences(in_path);
            if (seq_index >= seqs.size()) {
                throw ValidationError("--index: file holds " + std::to_string(seqs.size()) + " sequence(s)");
            }
            emit_json(io::landmarks_to_json(decode_sequence_landmarks(seqs[seq_index])), out_path);
        } else if (*pca) {
            std::vector<BoundarySequence> training;
            for (const auto& p : inputs) {
                auto s = io::read_sequences(p);
                training.insert(training.end(), s.begin(), s.end());
            }
            const auto out = pca_augment(training, count, sigma_cap, seed);
            json arr = json::array();
            for (const auto& s : out) arr.push_back(io::sequence_to_json(s));
            if (out_path.empty() || out_path == "-") {
                std::cout << arr.dump(1) << '\n';
            } else {
                io::write_sequences(out, out_path);
            }
        } else if (*post) {
            BinaryMask m = io::read_mask(in_path);
            const bool both = !largest && !fill;
            if (largest || both) m = largest_component(m, connectivity_flag(conn));
            if (fill || both) m = fill_holes(m);
            io::write_mask(m, out_path);
        } else if (*eval_seg) {
            SegOptions opts;
            opts.hd_percentile = hd_pct;
            const SegScores s = seg_scores(io::read_mask(pred_path), io::read_mask(gt_path), opts);
            if (as_json) {
                emit_json(io::seg_scores_to_json(s), "");
            } else {
                std::cout << "dsc " << fmt(s.dsc) << "\niou " << fmt(s.iou) << "\nsensitivity " << fmt(s.sensitivity)
                          << "\nspecificity " << fmt(s.specificity) << "\nhd_mm " << fmt(s.hd_mm) << '\n';
            }
            if (!csv_path.empty()) {
                CaseReport c{case_id, s, std::nullopt};
                std::ofstream os(csv_path);
                io::write_report_csv(std::span<const CaseReport>(&c, 1), os);
            }
        } else if (*eval_lm) {
            Spacing sp{};
            if (!spacing_str.empty()) sp = parse_spacing(spacing_str);
            if (!mask_path.empty()) {
                sp = io::parse_volume_header(io::read_text(io::header_path(mask_path))).spacing;
            }
            const LandmarkErrors e =
                landmark_errors(io::read_landmarks_json(pred_path), io::read_landmarks_json(gt_path), sp);
            if (as_json) {
                emit_json(io::landmark_errors_to_json(e), "");
            } else {
                for (const auto& x : e.entries) {
                    std::cout << landmark_name(x.name) << " pixel " << fmt(x.pixel_error) << " mm " << fmt(x.mm_error)
                              << " axis_max " << x.axis_max << " in_box " << (x.in_box ? "yes" : "no") << '\n';
                }
                for (auto n : e.false_positives) std::cout << landmark_name(n) << " false positive\n";
                for (auto n : e.false_negatives) std::cout << landmark_name(n) << " false negative\n";
            }
            if (!csv_path.empty()) {
                CaseReport c{case_id, std::nullopt, e};
                std::ofstream os(csv_path);
                io::write_report_csv(std::span<const CaseReport>(&c, 1), os);
            }
        } else if (*net) {
            ArchitectureLedger l;
            if (arch == "tiramisu") {
                TiramisuConfig cfg;
                cfg.growth_rate = growth;
                l = tiramisu_ledger(cfg);
            } else if (arch == "unet") {
                l = unet_ledger();
            } else {
                l = lstm_ledger();
            }
            if (as_json) {
                emit_json(io::ledger_to_json(l), "");
            } else {
                std::cout << render_text(l);
            }
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: json: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
