#pragma once

// GraphML and plain edge-list serialization of thresholded networks.

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "parnet/corpus.hpp"
#include "parnet/corpus_io.hpp"
#include "parnet/error.hpp"
#include "parnet/format.hpp"
#include "parnet/graph.hpp"

namespace parnet {

/// A network plus the metadata that travels with it on disk.
struct NetworkFile {
  Network network;
  std::string doc_id;
  std::optional<DocKind> kind;
  std::optional<int> sample;
  std::vector<std::size_t> paragraphs;  // per node; empty means identity
};

namespace detail {
inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file '" + path.string() + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}
}  // namespace detail

inline std::string to_graphml(const NetworkFile& f) {
  const auto& net = f.network;
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
    << "  <key id=\"doc_id\" for=\"graph\" attr.name=\"doc_id\" attr.type=\"string\"/>\n"
    << "  <key id=\"kind\" for=\"graph\" attr.name=\"kind\" attr.type=\"string\"/>\n"
    << "  <key id=\"sample\" for=\"graph\" attr.name=\"sample\" attr.type=\"int\"/>\n"
    << "  <key id=\"density\" for=\"graph\" attr.name=\"density\" attr.type=\"double\"/>\n"
    << "  <key id=\"threshold\" for=\"graph\" attr.name=\"threshold\" attr.type=\"double\"/>\n"
    << "  <key id=\"paragraph\" for=\"node\" attr.name=\"paragraph\" attr.type=\"int\"/>\n"
    << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
    << "  <graph id=\"G\" edgedefault=\"undirected\">\n";
  o << "    <data key=\"doc_id\">" << detail::xml_escape(f.doc_id) << "</data>\n";
  if (f.kind) o << "    <data key=\"kind\">" << to_string(*f.kind) << "</data>\n";
  if (f.sample) o << "    <data key=\"sample\">" << *f.sample << "</data>\n";
  if (net.target_density()) o << "    <data key=\"density\">" << format_double(*net.target_density()) << "</data>\n";
  if (net.threshold()) o << "    <data key=\"threshold\">" << format_double(*net.threshold()) << "</data>\n";
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    const auto para = f.paragraphs.empty() ? i : f.paragraphs.at(i);
    o << "    <node id=\"n" << i << "\"><data key=\"paragraph\">" << para << "</data></node>\n";
  }
  for (const auto& e : net.edges())
    o << "    <edge source=\"n" << e.u << "\" target=\"n" << e.v << "\"><data key=\"weight\">"
      << format_double(e.weight) << "</data></edge>\n";
  o << "  </graph>\n</graphml>\n";
  return o.str();
}

/// Reads GraphML produced by to_graphml or by other tools. Node ids may be
/// arbitrary strings; they are numbered in document order. `source` names
/// the input in error messages.
inline NetworkFile parse_graphml(const std::string& text, const std::string& source = "<graphml>") {
  namespace pt = boost::property_tree;
  auto fail = [&](const std::string& why) { return Error("malformed GraphML in '" + source + "': " + why); };

  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw fail(e.message() + " at line " + std::to_string(e.line()));
  }
  const auto root = tree.get_child_optional("graphml");
  if (!root) throw fail("no <graphml> root element");
  const auto graph = root->get_child_optional("graph");
  if (!graph) throw fail("no <graph> element");

  // key id -> attribute name, so foreign files that use d0/d1 ids still work
  std::map<std::string, std::string> key_name;
  for (const auto& [tag, node] : *root) {
    if (tag != "key") continue;
    const auto id = node.get<std::string>("<xmlattr>.id", "");
    // '.' is the default path separator, and the attribute name contains one
    key_name[id] = node.get<std::string>(pt::ptree::path_type("<xmlattr>/attr.name", '/'), id);
  }
  auto attr_of = [&](const pt::ptree& data) {
    const auto key = data.get<std::string>("<xmlattr>.key", "");
    const auto it = key_name.find(key);
    return it == key_name.end() ? key : it->second;
  };

  NetworkFile f;
  std::optional<double> density, threshold;
  std::map<std::string, NodeId> ids;
  std::vector<std::size_t> paragraphs;
  std::vector<Edge> edges;
  try {
    for (const auto& [tag, node] : *graph) {
      if (tag == "data") {
        const auto name = attr_of(node);
        const auto value = node.get_value<std::string>();
        if (name == "doc_id") f.doc_id = value;
        else if (name == "kind") f.kind = parse_kind(value);
        else if (name == "sample") f.sample = static_cast<int>(parse_integer(value));
        else if (name == "density") density = parse_double(value);
        else if (name == "threshold") threshold = parse_double(value);
      } else if (tag == "node") {
        const auto id = node.get<std::string>("<xmlattr>.id");
        if (!ids.emplace(id, static_cast<NodeId>(ids.size())).second) throw fail("duplicate node id '" + id + "'");
        std::size_t para = paragraphs.size();
        for (const auto& [t2, d] : node)
          if (t2 == "data" && attr_of(d) == "paragraph")
            para = static_cast<std::size_t>(parse_integer(d.get_value<std::string>()));
        paragraphs.push_back(para);
      }
    }
    for (const auto& [tag, node] : *graph) {
      if (tag != "edge") continue;
      const auto s = node.get<std::string>("<xmlattr>.source");
      const auto t = node.get<std::string>("<xmlattr>.target");
      const auto si = ids.find(s), ti = ids.find(t);
      if (si == ids.end() || ti == ids.end()) throw fail("edge references unknown node '" + (si == ids.end() ? s : t) + "'");
      double w = 1.0;
      for (const auto& [t2, d] : node)
        if (t2 == "data" && attr_of(d) == "weight") w = parse_double(d.get_value<std::string>());
      edges.push_back({si->second, ti->second, w});
    }
    f.network = Network(ids.size(), std::move(edges), density, threshold);
  } catch (const pt::ptree_error& e) {
    throw fail(e.what());
  } catch (const Error& e) {
    const std::string what = e.what();
    if (what.rfind("malformed GraphML", 0) == 0) throw;
    throw fail(what);
  }
  f.paragraphs = std::move(paragraphs);
  return f;
}

inline void write_graphml(const std::filesystem::path& path, const NetworkFile& f) {
  detail::write_file(path, to_graphml(f));
}

inline NetworkFile read_graphml(const std::filesystem::path& path) {
  return parse_graphml(read_text_file(path), path.string());
}

/// `# nodes N` header, then one `u v w` line per edge (0-based ids).
inline std::string to_edge_list(const Network& net, bool with_weights = true) {
  std::ostringstream o;
  o << "# nodes " << net.node_count() << "\n";
  for (const auto& e : net.edges()) {
    o << e.u << ' ' << e.v;
    if (with_weights) o << ' ' << format_double(e.weight);
    o << '\n';
  }
  return o.str();
}

/// Lines are `u v` or `u v w`; `#` starts a comment. Without a `# nodes N`
/// header the node count is one past the largest id.
inline Network parse_edge_list(std::string_view text, const std::string& source = "<edge list>") {
  std::optional<std::size_t> declared;
  std::vector<Edge> edges;
  std::size_t max_id = 0;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    auto fail = [&](const std::string& why) {
      return Error("malformed edge list '" + source + "' line " + std::to_string(line_no) + ": " + why);
    };
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string a, b, c, extra;
    if (!(ls >> a)) continue;
    if (a[0] == '#') {
      std::istringstream hs(line.substr(line.find('#') + 1));
      std::string word, count;
      if (hs >> word >> count && word == "nodes") {
        try {
          declared = static_cast<std::size_t>(parse_integer(count));
        } catch (const Error& e) {
          throw fail(e.what());
        }
      }
      continue;
    }
    if (!(ls >> b)) throw fail("expected 'u v [w]'");
    const bool has_w = static_cast<bool>(ls >> c);
    if (ls >> extra) throw fail("too many fields");
    try {
      const auto u = parse_integer(a), v = parse_integer(b);
      if (u < 0 || v < 0) throw fail("negative node id");
      const double w = has_w ? parse_double(c) : 1.0;
      edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v), w});
      max_id = std::max<std::size_t>(max_id, static_cast<std::size_t>(std::max(u, v)));
    } catch (const Error& e) {
      const std::string what = e.what();
      if (what.rfind("malformed edge list", 0) == 0) throw;
      throw fail(what);
    }
  }
  const std::size_t n = declared ? *declared : (edges.empty() ? 0 : max_id + 1);
  try {
    return Network(n, std::move(edges));
  } catch (const Error& e) {
    throw Error("malformed edge list '" + source + "': " + e.what());
  }
}

inline void write_edge_list(const std::filesystem::path& path, const Network& net, bool with_weights = true) {
  detail::write_file(path, to_edge_list(net, with_weights));
}

inline Network read_edge_list(const std::filesystem::path& path) {
  return parse_edge_list(read_text_file(path), path.string());
}

}  // namespace parnet
