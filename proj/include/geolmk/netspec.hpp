#pragma once

// Architecture ledgers: feature-map and parameter arithmetic for the
// segmentation network (fully convolutional DenseNet), the landmark U-Net and
// the row-wise LSTM, computed layer by layer without instantiating anything.
//
// Parameter conventions:
//   conv / deconv      kernel^2 * in * out + out (bias)
//   batch norm         2 per normalised feature
//   dense layer        BN(in) + 3x3 conv in -> k
//   transition down    BN(in) + 1x1 conv in -> in, 2x2 average pool
//   transition up      3x3 stride-2 transposed conv over the previous block's
//                      new features (n_prev * k -> n_prev * k)
//   LSTM cell          4 * ((input + units) * units + units)

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace geolmk {

enum class LayerKind { input, conv, dense_block, transition_down, transition_up_dense_block, max_pool, deconv,
                       upsample_copy, softmax, lstm_stack, dense_head };

const char* layer_kind_name(LayerKind k) noexcept;

struct LedgerEntry {
    LayerKind kind = LayerKind::conv;
    std::string label;
    int kernel = 0;          // 0 when not a convolution
    int layers = 0;          // dense-block depth n
    int growth = 0;          // k
    std::int64_t in_features = 0;
    std::int64_t out_features = 0;
    // Features the block adds (n * k) and passes upward; dense blocks only.
    std::int64_t new_features = 0;
    std::int64_t spatial = 0;  // square side length; 0 when not tracked
    std::int64_t params = 0;
    // Published feature-map count for this row, when one exists.
    std::optional<std::int64_t> reference;

    bool discrepant() const noexcept { return reference && *reference != out_features; }
};

struct ArchitectureLedger {
    std::string name;
    std::vector<LedgerEntry> entries;
    std::int64_t total_params = 0;
    // Free-form notes (known conflicts with published tables, conventions).
    std::vector<std::string> notes;

    std::vector<const LedgerEntry*> discrepancies() const;
};

struct TiramisuConfig {
    int growth_rate = 16;
    std::vector<int> block_layers{4, 5, 7, 10, 12, 15, 12, 10, 7, 5, 4};
    int stem_features = 48;
    int input_channels = 1;
    int classes = 2;
};

// Throws ValidationError for k < 1 or a block list that is not symmetric
// around a bottleneck (odd length >= 3).
ArchitectureLedger tiramisu_ledger(const TiramisuConfig& cfg = {});

// 3-level U-Net with 5x5 kernels on 256x256 slices, 21 output classes.
ArchitectureLedger unet_ledger();

struct LstmConfig {
    int cells = 64;
    int units = 512;
    int row_width = 64;
    int outputs = 2;
};

ArchitectureLedger lstm_ledger(const LstmConfig& cfg = {});

std::string render_text(const ArchitectureLedger& ledger);

}  // namespace geolmk
