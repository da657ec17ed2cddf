#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "fastpacket/model.hpp"
#include "fastpacket/svm.hpp"

namespace fastpacket {

// On-disk container: magic "FPK1", a u32 format version, then tagged
// sections (4-byte tag, u64 payload length, payload), all little-endian.
// CFG0/VOCB/IMAT/OMAT/LBLS are always present; SVMS rides along when a
// linear classifier was trained on top of the embeddings.
inline constexpr char kStoreMagic[4] = {'F', 'P', 'K', '1'};
inline constexpr std::uint32_t kStoreVersion = 1;

struct SvmAttachment {
  std::string positive_label;
  SvmModel svm;
};

struct ModelBundle {
  EmbeddingModel model;
  std::optional<SvmAttachment> svm;
};

void save_model(const ModelBundle& bundle, std::ostream& out);
void save_model_file(const ModelBundle& bundle,
                     const std::filesystem::path& path);
ModelBundle load_model(std::istream& in);
ModelBundle load_model_file(const std::filesystem::path& path);

enum class VecScope {
  words,  // V composed rows (word vector + its n-gram vectors)
  full,   // V raw word rows, then B bucket rows named __bucket__<i>
};

VecScope vec_scope_from_name(const std::string& name);

// Text format: "N D" header, then one `token v1 .. vD` row per line,
// values printed with %.6g.
void export_vectors(const EmbeddingModel& model, VecScope scope,
                    std::ostream& out);
void export_vectors_file(const EmbeddingModel& model, VecScope scope,
                         const std::filesystem::path& path);

// Overwrites input rows whose token is a vocabulary word or __bucket__<i>
// with i < buckets; other tokens are ignored. Returns the number of rows
// applied. The vector dimension must equal the model dimension.
std::size_t load_pretrained(EmbeddingModel& model, std::istream& in);
std::size_t load_pretrained_file(EmbeddingModel& model,
                                 const std::filesystem::path& path);

}  // namespace fastpacket
