#include "geolmk/netspec.hpp"

#include <iomanip>
#include <sstream>

#include "geolmk/error.hpp"

namespace geolmk {

namespace {

std::int64_t conv_params(int kernel, std::int64_t in, std::int64_t out) {
    return static_cast<std::int64_t>(kernel) * kernel * in * out + out;
}

std::int64_t bn_params(std::int64_t features) { return 2 * features; }

LedgerEntry entry(LayerKind kind, std::string label, int kernel, int layers, int growth, std::int64_t in,
                  std::int64_t out) {
    LedgerEntry e;
    e.kind = kind;
    e.label = std::move(label);
    e.kernel = kernel;
    e.layers = layers;
    e.growth = growth;
    e.in_features = in;
    e.out_features = out;
    return e;
}

std::int64_t dense_block_params(std::int64_t in, int layers, int k) {
    std::int64_t p = 0;
    for (int j = 0; j < layers; ++j) {
        const std::int64_t c = in + static_cast<std::int64_t>(j) * k;
        p += bn_params(c) + conv_params(3, c, k);
    }
    return p;
}

// Feature-map column of the reference 103-layer table, for growth rate 16.
constexpr std::int64_t kReferenceTiramisu[] = {48, 112, 192, 304, 464, 656, 896, 1088, 816, 578, 384, 256, 2, 2};

bool default_layout(const TiramisuConfig& cfg) {
    return cfg.growth_rate == 16 && cfg.stem_features == 48 && cfg.classes == 2 &&
           cfg.block_layers == std::vector<int>{4, 5, 7, 10, 12, 15, 12, 10, 7, 5, 4};
}

}  // namespace

const char* layer_kind_name(LayerKind k) noexcept {
    switch (k) {
        case LayerKind::input: return "input";
        case LayerKind::conv: return "conv";
        case LayerKind::dense_block: return "dense_block";
        case LayerKind::transition_down: return "transition_down";
        case LayerKind::transition_up_dense_block: return "transition_up+dense_block";
        case LayerKind::max_pool: return "max_pool";
        case LayerKind::deconv: return "deconv";
        case LayerKind::upsample_copy: return "upsample+copy";
        case LayerKind::softmax: return "softmax";
        case LayerKind::lstm_stack: return "lstm_stack";
        case LayerKind::dense_head: return "dense_head";
    }
    return "?";
}

std::vector<const LedgerEntry*> ArchitectureLedger::discrepancies() const {
    std::vector<const LedgerEntry*> out;
    for (const auto& e : entries)
        if (e.discrepant()) out.push_back(&e);
    return out;
}

ArchitectureLedger tiramisu_ledger(const TiramisuConfig& cfg) {
    const int k = cfg.growth_rate;
    if (k < 1) throw ValidationError("growth rate must be >= 1");
    const auto& blocks = cfg.block_layers;
    if (blocks.size() < 3 || blocks.size() % 2 == 0) {
        throw ValidationError("block layer list must have odd length >= 3 (down path, bottleneck, up path)");
    }
    const std::size_t depth = blocks.size() / 2;
    for (std::size_t i = 0; i < depth; ++i) {
        if (blocks[i] != blocks[blocks.size() - 1 - i]) throw ValidationError("block layer list must be symmetric");
    }
    for (int n : blocks)
        if (n < 1) throw ValidationError("every dense block needs at least one layer");

    ArchitectureLedger L;
    L.name = "tiramisu";
    const bool reference = default_layout(cfg);
    std::size_t row = 0;
    auto push = [&](LedgerEntry e) {
        if (reference && e.kind != LayerKind::input) e.reference = kReferenceTiramisu[row++];
        L.total_params += e.params;
        L.entries.push_back(std::move(e));
    };

    push(entry(LayerKind::input, "Input", 0, 0, 0, cfg.input_channels, cfg.input_channels));
    {
        LedgerEntry e = entry(LayerKind::conv, "3x3 Convolution", 3, 0, 0, cfg.input_channels, cfg.stem_features);
        e.params = conv_params(3, cfg.input_channels, cfg.stem_features);
        push(e);
    }

    std::int64_t features = cfg.stem_features;
    std::vector<std::int64_t> skips;
    for (std::size_t b = 0; b < depth; ++b) {
        const int n = blocks[b];
        LedgerEntry e = entry(LayerKind::transition_down, "Dense Block (" + std::to_string(n) + " layers) + Transition Down", 3,
                      n, k, features, features + static_cast<std::int64_t>(n) * k);
        e.new_features = static_cast<std::int64_t>(n) * k;
        e.params = dense_block_params(features, n, k) + bn_params(e.out_features) + conv_params(1, e.out_features, e.out_features);
        features = e.out_features;
        skips.push_back(features);
        push(e);
    }

    std::int64_t carried = 0;  // new features handed to the next transition up
    {
        const int n = blocks[depth];
        LedgerEntry e = entry(LayerKind::dense_block, "Dense Block (" + std::to_string(n) + " layers)", 3, n, k, features,
                      features + static_cast<std::int64_t>(n) * k);
        e.new_features = static_cast<std::int64_t>(n) * k;
        e.params = dense_block_params(features, n, k);
        carried = e.new_features;
        features = e.out_features;
        push(e);
    }

    for (std::size_t b = depth + 1; b < blocks.size(); ++b) {
        const int n = blocks[b];
        const std::int64_t skip = skips[blocks.size() - 1 - b];
        const std::int64_t in = skip + carried;
        LedgerEntry e = entry(LayerKind::transition_up_dense_block, "Transition Up + Dense Block (" + std::to_string(n) + " layers)",
                      3, n, k, in, in + static_cast<std::int64_t>(n) * k);
        e.new_features = static_cast<std::int64_t>(n) * k;
        e.params = conv_params(3, carried, carried) + dense_block_params(in, n, k);
        carried = e.new_features;
        features = e.out_features;
        push(e);
    }

    {
        LedgerEntry e = entry(LayerKind::conv, "1x1 Convolution", 1, 0, 0, features, cfg.classes);
        e.params = conv_params(1, features, cfg.classes);
        push(e);
        push(entry(LayerKind::softmax, "Softmax", 0, 0, 0, cfg.classes, cfg.classes));
    }

    std::int64_t conv_layers = 2;  // stem and classifier
    for (int n : blocks) conv_layers += n;
    conv_layers += static_cast<std::int64_t>(2 * depth);  // transitions down and up
    L.notes.push_back("convolutional layers: " + std::to_string(conv_layers));
    if (reference) {
        for (const auto* d : L.discrepancies()) {
            L.notes.push_back("'" + d->label + "': computed " + std::to_string(d->out_features) + ", reference table lists " +
                              std::to_string(*d->reference));
        }
        L.notes.push_back("reference feature counts are consistent with growth rate 16; the listed hyper-parameter is 24");
    }
    return L;
}

ArchitectureLedger unet_ledger() {
    ArchitectureLedger L;
    L.name = "unet";
    auto push = [&](LayerKind kind, const char* label, int kernel, std::int64_t in, std::int64_t out, std::int64_t side,
                    bool norm) {
        LedgerEntry e = entry(kind, label, kernel, 0, 0, in, out);
        e.spatial = side;
        if (kernel > 0) e.params = conv_params(kernel, in, out) + (norm ? bn_params(out) : 0);
        L.total_params += e.params;
        L.entries.push_back(std::move(e));
    };
    push(LayerKind::input, "Input", 0, 1, 1, 256, false);
    push(LayerKind::conv, "5x5 Convolution", 5, 1, 32, 256, true);
    push(LayerKind::conv, "5x5 Convolution", 5, 32, 32, 256, true);
    push(LayerKind::max_pool, "Max-pooling", 0, 32, 32, 128, false);
    push(LayerKind::conv, "5x5 Convolution", 5, 32, 64, 128, true);
    push(LayerKind::conv, "5x5 Convolution", 5, 64, 64, 128, true);
    push(LayerKind::max_pool, "Max-pooling", 0, 64, 64, 64, false);
    push(LayerKind::conv, "5x5 Convolution", 5, 64, 128, 64, true);
    push(LayerKind::deconv, "5x5 Deconvolution", 5, 128, 64, 64, true);
    // decoder 64 + encoder copy 64
    push(LayerKind::upsample_copy, "Upsampling + Copy", 0, 64, 64 + 64, 128, false);
    push(LayerKind::deconv, "5x5 Deconvolution", 5, 128, 64, 128, true);
    push(LayerKind::deconv, "5x5 Deconvolution", 5, 64, 32, 128, true);
    push(LayerKind::upsample_copy, "Upsampling + Copy", 0, 32, 32 + 32, 256, false);
    push(LayerKind::deconv, "5x5 Deconvolution", 5, 64, 32, 256, true);
    push(LayerKind::deconv, "5x5 Deconvolution", 5, 32, 32, 256, true);
    push(LayerKind::deconv, "5x5 Deconvolution", 5, 32, 21, 256, false);
    push(LayerKind::softmax, "Softmax", 0, 21, 21, 256, false);
    L.notes.push_back("batch norm counted on every hidden convolution; the 21-class output layer has none");
    return L;
}

ArchitectureLedger lstm_ledger(const LstmConfig& cfg) {
    if (cfg.cells < 1 || cfg.units < 1 || cfg.row_width < 1 || cfg.outputs < 1) {
        throw ValidationError("LSTM sizes must be positive");
    }
    ArchitectureLedger L;
    L.name = "lstm";
    const std::int64_t units = cfg.units;
    LedgerEntry in = entry(LayerKind::input, "Boundary image rows", 0, 0, 0, cfg.row_width, cfg.row_width);
    in.spatial = cfg.cells;
    LedgerEntry cell = entry(LayerKind::lstm_stack, "LSTM cell (shared across rows)", 0, cfg.cells, 0, cfg.row_width, units);
    cell.spatial = cfg.cells;
    cell.params = 4 * ((cfg.row_width + units) * units + units);
    LedgerEntry head = entry(LayerKind::dense_head, "Per-row output head", 0, 0, 0, units, cfg.outputs);
    head.spatial = cfg.cells;
    head.params = units * cfg.outputs + cfg.outputs;
    LedgerEntry soft = entry(LayerKind::softmax, "Concatenated softmax", 0, 0, 0, cfg.outputs, cfg.outputs);
    soft.spatial = cfg.cells;
    for (auto* e : {&in, &cell, &head, &soft}) {
        L.total_params += e->params;
        L.entries.push_back(*e);
    }
    L.notes.push_back("spatial column holds the number of cells (rows); output shape " + std::to_string(cfg.cells) +
                      "x" + std::to_string(cfg.outputs));
    return L;
}

std::string render_text(const ArchitectureLedger& ledger) {
    std::ostringstream os;
    os << "# " << ledger.name << '\n';
    os << std::left << std::setw(50) << "layer" << std::right << std::setw(8) << "in" << std::setw(8) << "out"
       << std::setw(8) << "size" << std::setw(12) << "params" << "  note\n";
    for (const auto& e : ledger.entries) {
        os << std::left << std::setw(50) << e.label << std::right << std::setw(8) << e.in_features << std::setw(8)
           << e.out_features << std::setw(8) << (e.spatial > 0 ? std::to_string(e.spatial) : "-") << std::setw(12)
           << e.params;
        if (e.discrepant()) os << "  MISMATCH reference=" << *e.reference;
        os << '\n';
    }
    os << "total parameters: " << ledger.total_params << '\n';
    for (const auto& n : ledger.notes) os << "note: " << n << '\n';
    return os.str();
}

}  // namespace geolmk
