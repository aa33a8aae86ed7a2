#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "noisecal/image.hpp"
#include "noisecal/random.hpp"

namespace noisecal {

struct DatasetEntry {
  std::string relative;  // generic ('/'-separated) path below the root
  std::filesystem::path absolute;
};

struct DatasetListing {
  std::vector<DatasetEntry> entries;  // sorted by `relative`, bytewise
  std::vector<std::string> errors;    // traversal problems, not fatal
};

/// True for .png, .jpg and .jpeg, case-insensitively.
bool has_image_extension(const std::filesystem::path& path);

/// Recursive listing of image files under `root`. Throws Error(kIo) when the
/// root does not exist or is not a directory.
DatasetListing walk_dataset(const std::filesystem::path& root);

enum class CorpusSampling {
  kFirst,    // first `limit` entries in path order
  kUniform,  // seeded uniform sample of `limit` entries, kept in path order
};

struct Corpus {
  std::vector<std::string> paths;  // relative paths, parallel to `images`
  std::vector<ImageBuffer> images;
  std::vector<std::string> skipped;  // "path: reason" for unreadable files
};

/// Loads up to `limit` images (0 means all) from a dataset directory.
Corpus load_corpus(const std::filesystem::path& root, std::size_t limit = 0,
                   CorpusSampling sampling = CorpusSampling::kFirst, Seed seed = {});

}  // namespace noisecal
