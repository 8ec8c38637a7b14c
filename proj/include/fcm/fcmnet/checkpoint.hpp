#pragma once

// Checkpoint file layout (all integers little-endian):
//
//   magic        8 bytes  "FCMCKPT\0"
//   version      u32      = 1
//   value_bytes  u32      4 (f32) or 8 (f64)
//   config       11 × u64 D, L, d_model, heads, d_k, d_v, bottleneck, d_ff,
//                         n_layers, concat (0 time, 1 feature),
//                         mode (0 full, 1 bare_fore, 2 bare_ap, 3 wo_att, 4 wo_Lc)
//   trained      u8
//   n_params     u32, then per parameter (sorted by name):
//                  name_len u32, name bytes, rank u32, dims rank × u64,
//                  values numel × value_bytes (IEEE-754, raw)
//   n_extras     u32, then per extra (sorted by name):
//                  name_len u32, name bytes, count u64, values count × f64
//   checksum     u64      FNV-1a over every preceding byte
//
// Extras carry non-learnable state such as the train-split channel statistics.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fcm/fcmnet/model.hpp"

namespace fcm::net {

using CheckpointExtras = std::map<std::string, std::vector<double>>;

struct CheckpointHeader {
    std::uint32_t version = 0;
    ModelConfig config;
    bool trained = false;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const FcmModel<T>& model, const CheckpointExtras& extras = {});

/// Reads only the header; config.precision reflects the stored value width.
CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

/// Throws DataError on a corrupt file or when T does not match the stored
/// precision.
template <typename T>
FcmModel<T> load_checkpoint(const std::filesystem::path& path, CheckpointExtras* extras = nullptr);

}  // namespace fcm::net
