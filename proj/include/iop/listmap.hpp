#pragma once

// Reader for the small list-of-maps text format used by policy and script
// files:
//
//   - action: remind Buyer of Shipment until Payment
//     when: 0 0 * * * // daily
//     max tries: 5
//
// Keys may contain spaces; everything after `//` is a comment.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace iop {

struct ListMapEntry {
  std::size_t line = 0;  // line of the leading `-`
  std::map<std::string, std::string> fields;

  /// nullptr if absent.
  const std::string* get(const std::string& key) const;
};

class ListMapError : public std::runtime_error {
 public:
  ListMapError(std::size_t entry, std::size_t line, const std::string& what)
      : std::runtime_error("entry " + std::to_string(entry) + " (line " + std::to_string(line) +
                           "): " + what),
        entry_(entry),
        line_(line) {}
  std::size_t entry() const noexcept { return entry_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t entry_;
  std::size_t line_;
};

std::vector<ListMapEntry> parse_list_of_maps(std::string_view text);

std::string trim(std::string_view s);

}  // namespace iop
