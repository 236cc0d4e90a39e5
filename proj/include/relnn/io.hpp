// JSON Lines readers and writers for the pipeline's data files.

#ifndef RELNN_IO_HPP_
#define RELNN_IO_HPP_

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "relnn/click_trainer.hpp"
#include "relnn/datasets.hpp"
#include "relnn/finetune.hpp"

namespace relnn::io {

// Malformed input, reported with file and line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// {"query","day","items":[{"id","title","position","clicked"}]}
std::vector<SessionRecord> read_sessions(const std::filesystem::path& path);
void write_sessions(std::span<const SessionRecord> sessions,
                    const std::filesystem::path& path);

// {"query","title_a","title_b","clicks_a","clicks_b"}; pairs are
// canonicalized on read and rows with no clicks are rejected.
std::vector<SessionPair> read_session_pairs(const std::filesystem::path& path);
void write_session_pairs(std::span<const SessionPair> pairs,
                         const std::filesystem::path& path);

// {"query","title","grade"}
std::vector<RatingExample> read_ratings(const std::filesystem::path& path);
void write_ratings(std::span<const RatingExample> ratings,
                   const std::filesystem::path& path);

struct QueryTitle {
  std::string query;
  std::string title;
};

// {"query","title"}; extra fields are ignored.
std::vector<QueryTitle> read_query_titles(const std::filesystem::path& path);

// {"title"}; extra fields are ignored.
std::vector<std::string> read_titles(const std::filesystem::path& path);

// Writes bytes exactly, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace relnn::io

#endif  // RELNN_IO_HPP_
