#pragma once

// Flat result records and their CSV (RFC 4180) and JSON-lines encodings.
// Doubles are written in shortest round-trip form so reruns are byte-identical.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qtransfer/error.hpp"

namespace qtransfer::app {

using Value = std::variant<double, std::int64_t, bool, std::string>;

class Record {
 public:
  Record& set(std::string key, Value v) {
    for (auto& f : fields_)
      if (f.first == key) {
        f.second = std::move(v);
        return *this;
      }
    fields_.emplace_back(std::move(key), std::move(v));
    return *this;
  }

  const std::vector<std::pair<std::string, Value>>& fields() const noexcept { return fields_; }

  const Value* find(const std::string& key) const {
    for (const auto& f : fields_)
      if (f.first == key) return &f.second;
    return nullptr;
  }

 private:
  std::vector<std::pair<std::string, Value>> fields_;
};

inline std::string to_text(const Value& v) {
  struct Visitor {
    std::string operator()(double x) const {
      if (std::isnan(x)) return "nan";
      if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
      char buf[64];
      const auto r = std::to_chars(buf, buf + sizeof buf, x);
      return std::string(buf, r.ptr);
    }
    std::string operator()(std::int64_t x) const { return std::to_string(x); }
    std::string operator()(bool x) const { return x ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, v);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Header from the first record; every record must carry the same columns.
inline void write_csv(std::ostream& out, const std::vector<Record>& rows) {
  if (rows.empty()) return;
  const auto& head = rows.front().fields();
  for (std::size_t i = 0; i < head.size(); ++i) out << (i ? "," : "") << csv_escape(head[i].first);
  out << "\r\n";
  for (const auto& r : rows) {
    if (r.fields().size() != head.size()) throw InvariantError("CSV rows have differing columns");
    for (std::size_t i = 0; i < head.size(); ++i) {
      if (r.fields()[i].first != head[i].first) throw InvariantError("CSV rows have differing columns");
      out << (i ? "," : "") << csv_escape(to_text(r.fields()[i].second));
    }
    out << "\r\n";
  }
}

inline nlohmann::ordered_json to_json(const Record& r) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.fields()) {
    if (const auto* d = std::get_if<double>(&v)) {
      // JSON has no NaN or infinity
      if (std::isfinite(*d))
        j[k] = *d;
      else
        j[k] = nullptr;
    } else if (const auto* i = std::get_if<std::int64_t>(&v)) {
      j[k] = *i;
    } else if (const auto* b = std::get_if<bool>(&v)) {
      j[k] = *b;
    } else {
      j[k] = std::get<std::string>(v);
    }
  }
  return j;
}

inline void write_jsonl(std::ostream& out, const std::vector<Record>& rows) {
  for (const auto& r : rows) out << to_json(r).dump() << '\n';
}

}  // namespace qtransfer::app
