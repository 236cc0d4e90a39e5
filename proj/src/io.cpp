#include "relnn/io.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

namespace relnn::io {
namespace {

using Json = nlohmann::ordered_json;

void for_each_line(const std::filesystem::path& path,
                   const std::function<void(const Json&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      fn(Json::parse(line));
    } catch (const std::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string id_string(const Json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw std::invalid_argument("item id must be a string or integer");
}

std::uint32_t count_field(const Json& obj, const char* name) {
  const auto value = obj.at(name).get<long long>();
  if (value < 0 || value > UINT32_MAX) {
    throw std::invalid_argument(std::string(name) + " out of range");
  }
  return static_cast<std::uint32_t>(value);
}

}  // namespace

std::vector<SessionRecord> read_sessions(const std::filesystem::path& path) {
  std::vector<SessionRecord> out;
  for_each_line(path, [&](const Json& obj) {
    SessionRecord record;
    record.query = obj.at("query").get<std::string>();
    record.day = count_field(obj, "day");
    for (const auto& item : obj.at("items")) {
      record.items.push_back({id_string(item.at("id")), item.at("title").get<std::string>(),
                              count_field(item, "position"),
                              item.at("clicked").get<bool>()});
    }
    out.push_back(std::move(record));
  });
  return out;
}

void write_sessions(std::span<const SessionRecord> sessions,
                    const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& s : sessions) {
    Json items = Json::array();
    for (const auto& item : s.items) {
      items.push_back(Json{{"id", item.id},
                           {"title", item.title},
                           {"position", item.position},
                           {"clicked", item.clicked}});
    }
    out << Json{{"query", s.query}, {"day", s.day}, {"items", std::move(items)}}.dump() << '\n';
  }
}

std::vector<SessionPair> read_session_pairs(const std::filesystem::path& path) {
  std::vector<SessionPair> out;
  for_each_line(path, [&](const Json& obj) {
    out.push_back(make_session_pair(obj.at("query").get<std::string>(),
                                    obj.at("title_a").get<std::string>(),
                                    obj.at("title_b").get<std::string>(),
                                    count_field(obj, "clicks_a"),
                                    count_field(obj, "clicks_b")));
  });
  return out;
}

void write_session_pairs(std::span<const SessionPair> pairs,
                         const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& p : pairs) {
    out << Json{{"query", p.query},
                {"title_a", p.title_pos},
                {"title_b", p.title_neg},
                {"clicks_a", p.clicks_pos},
                {"clicks_b", p.clicks_neg}}
               .dump()
        << '\n';
  }
}

std::vector<RatingExample> read_ratings(const std::filesystem::path& path) {
  std::vector<RatingExample> out;
  for_each_line(path, [&](const Json& obj) {
    out.push_back({obj.at("query").get<std::string>(), obj.at("title").get<std::string>(),
                   parse_grade(obj.at("grade").get<std::string>())});
  });
  return out;
}

void write_ratings(std::span<const RatingExample> ratings,
                   const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& r : ratings) {
    out << Json{{"query", r.query}, {"title", r.title}, {"grade", grade_name(r.grade)}}.dump()
        << '\n';
  }
}

std::vector<QueryTitle> read_query_titles(const std::filesystem::path& path) {
  std::vector<QueryTitle> out;
  for_each_line(path, [&](const Json& obj) {
    out.push_back({obj.at("query").get<std::string>(), obj.at("title").get<std::string>()});
  });
  return out;
}

std::vector<std::string> read_titles(const std::filesystem::path& path) {
  std::vector<std::string> out;
  for_each_line(path, [&](const Json& obj) { out.push_back(obj.at("title").get<std::string>()); });
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace relnn::io
