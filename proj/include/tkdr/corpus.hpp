#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tkdr/common.hpp"
#include "tkdr/serial.hpp"

namespace tkdr {

/// A document collection and its terminated concatenation doc1 $ doc2 $ ...
///
/// Document ids are 1-based. Each document is followed by one shared
/// terminator byte (0x00), so `size()` equals the number of suffixes.
class DocumentCollection {
 public:
  DocumentCollection() = default;
  DocumentCollection(std::vector<std::string> docs, std::vector<std::string> names = {});

  std::size_t doc_count() const { return docs_.size(); }
  std::uint64_t size() const { return text_.size(); }
  std::string_view text() const { return text_; }

  std::string_view doc(DocId d) const { return docs_.at(d - 1); }
  const std::string& name(DocId d) const { return names_.at(d - 1); }
  /// Global offset of the first byte of document d.
  std::uint64_t start(DocId d) const { return starts_.at(d - 1); }
  const std::vector<std::uint64_t>& boundaries() const { return starts_; }

  /// Document owning global offset pos; the terminator belongs to its document.
  DocId doc_at(std::uint64_t pos) const;

  void save(Writer& w) const;
  static DocumentCollection load(Reader& r);

 private:
  std::vector<std::string> docs_;
  std::vector<std::string> names_;
  std::string text_;
  std::vector<std::uint64_t> starts_;
};

/// Loads a directory (one document per regular file, sorted by filename) or a
/// single file of terminator-separated documents.
DocumentCollection load_collection(const std::filesystem::path& source);

}  // namespace tkdr
