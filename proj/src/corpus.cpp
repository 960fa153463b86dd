#include "tkdr/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace tkdr {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

DocumentCollection::DocumentCollection(std::vector<std::string> docs, std::vector<std::string> names)
    : docs_(std::move(docs)), names_(std::move(names)) {
  if (docs_.empty()) throw Error(ErrorCode::kInvalidArgument, "empty collection");
  if (names_.empty()) {
    for (std::size_t i = 0; i < docs_.size(); ++i) names_.push_back("doc" + std::to_string(i + 1));
  }
  if (names_.size() != docs_.size()) throw Error(ErrorCode::kInvalidArgument, "name count mismatch");
  std::uint64_t total = 0;
  for (const auto& d : docs_) {
    if (d.empty()) throw Error(ErrorCode::kInvalidArgument, "empty document");
    if (d.find(static_cast<char>(kTerminator)) != std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "reserved byte in document");
    }
    total += d.size() + 1;
  }
  text_.reserve(total);
  for (const auto& d : docs_) {
    starts_.push_back(text_.size());
    text_ += d;
    text_.push_back(static_cast<char>(kTerminator));
  }
}

DocId DocumentCollection::doc_at(std::uint64_t pos) const {
  if (pos >= text_.size()) throw Error(ErrorCode::kOutOfRange, "offset out of range");
  auto it = std::upper_bound(starts_.begin(), starts_.end(), pos);
  return static_cast<DocId>(it - starts_.begin());
}

void DocumentCollection::save(Writer& w) const {
  w.put<std::uint64_t>(docs_.size());
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    w.put_bytes(names_[i]);
    w.put_bytes(docs_[i]);
  }
}

DocumentCollection DocumentCollection::load(Reader& r) {
  auto n = r.get<std::uint64_t>();
  std::vector<std::string> docs, names;
  for (std::uint64_t i = 0; i < n; ++i) {
    names.push_back(r.get_bytes());
    docs.push_back(r.get_bytes());
  }
  return DocumentCollection(std::move(docs), std::move(names));
}

DocumentCollection load_collection(const std::filesystem::path& source) {
  namespace fs = std::filesystem;
  std::vector<std::string> docs, names;
  if (fs::is_directory(source)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(source)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    for (const auto& f : files) {
      std::string body = read_file(f);
      if (body.empty()) continue;
      if (body.find(static_cast<char>(kTerminator)) != std::string::npos) {
        throw Error(ErrorCode::kInvalidArgument, "reserved byte in document");
      }
      docs.push_back(std::move(body));
      names.push_back(f.filename().string());
    }
  } else if (fs::is_regular_file(source)) {
    std::string body = read_file(source);
    std::size_t begin = 0;
    std::size_t index = 0;
    while (begin < body.size()) {
      std::size_t end = body.find(static_cast<char>(kTerminator), begin);
      if (end == std::string::npos) end = body.size();
      if (end > begin) {
        docs.push_back(body.substr(begin, end - begin));
        names.push_back(source.filename().string() + "#" + std::to_string(++index));
      }
      begin = end + 1;
    }
  } else {
    throw Error(ErrorCode::kIo, "no such corpus source: " + source.string());
  }
  if (docs.empty()) throw Error(ErrorCode::kInvalidArgument, "empty collection");
  return DocumentCollection(std::move(docs), std::move(names));
}

}  // namespace tkdr
