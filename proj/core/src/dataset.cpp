#include "noisecal/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <system_error>

#include "noisecal/error.hpp"

namespace noisecal {

namespace fs = std::filesystem;

bool has_image_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

DatasetListing walk_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::kIo, "dataset root is not a directory: " + root.string());
  }
  DatasetListing listing;
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot list " + root.string() + ": " + ec.message());
  for (const fs::recursive_directory_iterator end; it != end; it.increment(ec)) {
    if (ec) {
      listing.errors.push_back(ec.message());
      ec.clear();
      continue;
    }
    const auto& entry = *it;
    std::error_code type_ec;
    if (!entry.is_regular_file(type_ec) || !has_image_extension(entry.path())) {
      if (type_ec) listing.errors.push_back(entry.path().string() + ": " + type_ec.message());
      continue;
    }
    listing.entries.push_back(
        {entry.path().lexically_relative(root).generic_string(), entry.path()});
  }
  if (ec) listing.errors.push_back(ec.message());
  std::sort(listing.entries.begin(), listing.entries.end(),
            [](const DatasetEntry& a, const DatasetEntry& b) { return a.relative < b.relative; });
  return listing;
}

Corpus load_corpus(const fs::path& root, std::size_t limit, CorpusSampling sampling, Seed seed) {
  auto listing = walk_dataset(root);
  const auto& entries = listing.entries;
  std::vector<std::size_t> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (limit > 0 && sampling == CorpusSampling::kUniform) {
    // Rank by a per-path hash: a seeded uniform subset that does not depend
    // on directory enumeration order. Unreadable files are replaced by the
    // next candidate in rank order.
    std::vector<std::uint64_t> rank(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      rank[i] = derive_seed(seed, entries[i].relative).value;
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
  }

  std::vector<std::pair<std::size_t, ImageBuffer>> loaded;
  Corpus corpus;
  for (std::size_t i : order) {
    if (limit > 0 && loaded.size() == limit) break;
    try {
      loaded.emplace_back(i, load_image(entries[i].absolute));
    } catch (const Error& e) {
      corpus.skipped.push_back(entries[i].relative + ": " + e.what());
    }
  }
  std::sort(loaded.begin(), loaded.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [i, image] : loaded) {
    corpus.paths.push_back(entries[i].relative);
    corpus.images.push_back(std::move(image));
  }
  for (const auto& error : listing.errors) corpus.skipped.push_back(error);
  return corpus;
}

}  // namespace noisecal
