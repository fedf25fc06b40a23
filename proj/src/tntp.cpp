// TNTP net and trip-table readers.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "logit_sue/error.hpp"
#include "logit_sue/network.hpp"

namespace sue {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view strip_comment(std::string_view line) {
  const auto pos = line.find('~');
  return pos == std::string_view::npos ? line : line.substr(0, pos);
}

std::optional<double> to_double(std::string_view tok) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::optional<long> to_int(std::string_view tok) {
  const auto d = to_double(tok);
  if (!d || *d != std::floor(*d)) return std::nullopt;
  return static_cast<long>(*d);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos) {
      line = text_.substr(pos_);
      pos_ = text_.size();
    } else {
      line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
    }
    ++number_;
    return true;
  }
  int number() const { return number_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int number_ = 0;
};

using Metadata = std::map<std::string, std::string, std::less<>>;

/// Consumes `<TAG> value` lines up to `<END OF METADATA>`.
Metadata read_metadata(LineReader& reader) {
  Metadata meta;
  std::string_view raw;
  while (reader.next(raw)) {
    const auto line = trim(raw);
    if (line.empty() || line.front() == '~') continue;
    if (line.front() != '<') {
      throw ParseError("expected a metadata tag, found '" + std::string(line) + "'",
                       reader.number());
    }
    const auto close = line.find('>');
    if (close == std::string_view::npos) {
      throw ParseError("malformed header tag '" + std::string(line) + "'", reader.number());
    }
    std::string tag(trim(line.substr(1, close - 1)));
    if (tag.empty()) throw ParseError("empty header tag", reader.number());
    if (tag == "END OF METADATA") return meta;
    meta[tag] = std::string(trim(line.substr(close + 1)));
  }
  throw ParseError("missing <END OF METADATA>", reader.number());
}

std::optional<long> int_tag(const Metadata& meta, std::string_view tag, int line) {
  const auto it = meta.find(tag);
  if (it == meta.end()) return std::nullopt;
  const auto v = to_int(it->second);
  if (!v || *v < 0) {
    throw ParseError("malformed header tag <" + std::string(tag) + ">: '" + it->second + "'",
                     line);
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Network parse_tntp_net(std::string_view content) {
  LineReader reader(content);
  const Metadata meta = read_metadata(reader);
  const int header_line = reader.number();

  Network net;
  const auto nodes = int_tag(meta, "NUMBER OF NODES", header_line);
  const auto links = int_tag(meta, "NUMBER OF LINKS", header_line);
  if (!nodes) throw ParseError("missing header tag <NUMBER OF NODES>", header_line);
  if (!links) throw ParseError("missing header tag <NUMBER OF LINKS>", header_line);
  net.node_count = static_cast<int>(*nodes);
  net.zone_count = static_cast<int>(int_tag(meta, "NUMBER OF ZONES", header_line).value_or(0));
  net.first_thru_node =
      static_cast<int>(int_tag(meta, "FIRST THRU NODE", header_line).value_or(1)) - 1;
  net.links.reserve(static_cast<std::size_t>(*links));

  std::string_view raw;
  while (reader.next(raw)) {
    auto line = strip_comment(raw);
    if (const auto semi = line.find(';'); semi != std::string_view::npos) {
      line = line.substr(0, semi);
    }
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() < 7) {
      throw ParseError("link row needs at least 7 fields, found " + std::to_string(tok.size()),
                       reader.number());
    }
    auto num = [&](std::size_t i, const char* name) {
      const auto v = to_double(tok[i]);
      if (!v) {
        throw ParseError(std::string("non-numeric ") + name + " '" + std::string(tok[i]) + "'",
                         reader.number());
      }
      return *v;
    };
    Link link;
    const auto tail = to_int(tok[0]);
    const auto head = to_int(tok[1]);
    if (!tail) throw ParseError("non-numeric init_node '" + std::string(tok[0]) + "'", reader.number());
    if (!head) throw ParseError("non-numeric term_node '" + std::string(tok[1]) + "'", reader.number());
    if (*tail < 1 || *tail > net.node_count || *head < 1 || *head > net.node_count) {
      throw ValidationError("line " + std::to_string(reader.number()) + ": link " +
                            std::to_string(*tail) + "->" + std::to_string(*head) +
                            " references a node outside 1.." + std::to_string(net.node_count));
    }
    link.tail = static_cast<NodeId>(*tail - 1);
    link.head = static_cast<NodeId>(*head - 1);
    link.capacity = num(2, "capacity");
    link.length = num(3, "length");
    link.free_flow_time = num(4, "free_flow_time");
    link.bpr_alpha = num(5, "b");
    link.bpr_beta = num(6, "power");
    if (tok.size() > 7) link.speed = num(7, "speed");
    if (tok.size() > 8) link.toll = num(8, "toll");
    if (tok.size() > 9) {
      link.link_type = std::string(tok[9]);
      if (link.link_type == "affine") {
        link.kind = CostKind::Affine;
      } else if (!to_double(tok[9])) {
        throw ParseError("non-numeric link_type '" + link.link_type + "'", reader.number());
      }
    }
    if (link.kind == CostKind::Bpr) {
      if (!(link.capacity > 0.0) || !(link.free_flow_time >= 0.0) || !(link.bpr_beta >= 0.0) ||
          !(link.bpr_alpha >= 0.0)) {
        throw ValidationError("line " + std::to_string(reader.number()) +
                              ": BPR link needs capacity > 0, free_flow_time >= 0, b >= 0, "
                              "power >= 0");
      }
    } else if (!(link.bpr_alpha >= 0.0)) {
      throw ValidationError("line " + std::to_string(reader.number()) +
                            ": affine link slope must be non-negative");
    }
    net.links.push_back(std::move(link));
  }
  if (static_cast<long>(net.links.size()) != *links) {
    throw ValidationError("header declares " + std::to_string(*links) + " links but " +
                          std::to_string(net.links.size()) + " rows were found");
  }
  return net;
}

DemandTable parse_tntp_trips(std::string_view content) {
  LineReader reader(content);
  const Metadata meta = read_metadata(reader);
  const int header_line = reader.number();

  DemandTable table;
  table.zone_count = static_cast<int>(int_tag(meta, "NUMBER OF ZONES", header_line).value_or(0));
  std::optional<double> declared_total;
  if (const auto it = meta.find("TOTAL OD FLOW"); it != meta.end()) {
    declared_total = to_double(it->second);
    if (!declared_total) {
      throw ParseError("malformed header tag <TOTAL OD FLOW>: '" + it->second + "'", header_line);
    }
  }

  std::map<std::pair<NodeId, NodeId>, double> demand;
  double file_total = 0.0;
  std::optional<NodeId> origin;
  std::string_view raw;
  while (reader.next(raw)) {
    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.starts_with("Origin")) {
      const auto tok = split_ws(line);
      const auto o = tok.size() == 2 ? to_int(tok[1]) : std::nullopt;
      if (!o || *o < 1) throw ParseError("malformed Origin line", reader.number());
      origin = static_cast<NodeId>(*o - 1);
      continue;
    }
    if (!origin) throw ParseError("destination entries before any Origin line", reader.number());
    std::string_view rest = line;
    while (!rest.empty()) {
      const auto semi = rest.find(';');
      const auto entry = trim(rest.substr(0, semi));
      rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
      if (entry.empty()) continue;
      const auto colon = entry.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("malformed 'dest : flow;' entry '" + std::string(entry) + "'",
                         reader.number());
      }
      const auto dest = to_int(trim(entry.substr(0, colon)));
      const auto flow = to_double(trim(entry.substr(colon + 1)));
      if (!dest || *dest < 1 || !flow || !(*flow >= 0.0)) {
        throw ParseError("malformed 'dest : flow;' entry '" + std::string(entry) + "'",
                         reader.number());
      }
      file_total += *flow;
      if (*flow > 0.0) {
        const auto key = std::make_pair(*origin, static_cast<NodeId>(*dest - 1));
        if (key.first == key.second) {
          table.warnings.push_back("line " + std::to_string(reader.number()) +
                                   ": intrazonal demand for zone " + std::to_string(*dest) +
                                   " dropped");
          continue;
        }
        if (demand.contains(key)) {
          table.warnings.push_back("line " + std::to_string(reader.number()) +
                                   ": duplicate entry merged");
        }
        demand[key] += *flow;
      }
    }
  }

  for (const auto& [key, d] : demand) {
    table.entries.push_back({key.first, key.second, d});
    table.total_demand += d;
  }
  if (declared_total && *declared_total > 0.0 &&
      std::abs(file_total - *declared_total) > 0.005 * *declared_total) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "<TOTAL OD FLOW> %.6g differs from the sum of entries %.6g",
                  *declared_total, file_total);
    table.warnings.emplace_back(buf);
  }
  return table;
}

Network load_tntp_net(const std::string& path) {
  try {
    return parse_tntp_net(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

DemandTable load_tntp_trips(const std::string& path) {
  try {
    return parse_tntp_trips(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string write_tntp_net(const Network& net) {
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "<NUMBER OF ZONES> %d\n<NUMBER OF NODES> %d\n<FIRST THRU NODE> %d\n"
                "<NUMBER OF LINKS> %zu\n<END OF METADATA>\n\n",
                net.zone_count, net.node_count, net.first_thru_node + 1, net.links.size());
  out += buf;
  out += "~ init_node term_node capacity length free_flow_time b power speed toll link_type ;\n";
  for (const auto& l : net.links) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g %.17g %.17g %.17g %.17g %.17g %s ;\n",
                  l.tail + 1, l.head + 1, l.capacity, l.length, l.free_flow_time, l.bpr_alpha,
                  l.bpr_beta, l.speed, l.toll, l.link_type.c_str());
    out += buf;
  }
  return out;
}

}  // namespace sue
