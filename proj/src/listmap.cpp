#include "iop/listmap.hpp"

namespace iop {

const std::string* ListMapEntry::get(const std::string& key) const {
  const auto it = fields.find(key);
  return it == fields.end() ? nullptr : &it->second;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<ListMapEntry> parse_list_of_maps(std::string_view text) {
  std::vector<ListMapEntry> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto c = line.find("//"); c != std::string_view::npos) line = line.substr(0, c);
    auto body = trim(line);
    if (body.empty()) continue;

    if (body[0] == '-') {
      out.push_back(ListMapEntry{line_no, {}});
      body = trim(std::string_view(body).substr(1));
      if (body.empty()) continue;
    } else if (out.empty()) {
      throw ListMapError(0, line_no, "expected '- ' to start an entry");
    }
    const auto colon = body.find(':');
    if (colon == std::string::npos)
      throw ListMapError(out.size() - 1, line_no, "expected 'key: value'");
    auto key = trim(std::string_view(body).substr(0, colon));
    auto value = trim(std::string_view(body).substr(colon + 1));
    if (key.empty()) throw ListMapError(out.size() - 1, line_no, "empty key");
    if (!out.back().fields.emplace(key, value).second)
      throw ListMapError(out.size() - 1, line_no, "duplicate key '" + key + "'");
  }
  return out;
}

}  // namespace iop
