#include "rsnet/config.hpp"

#include <fstream>

#include "json.hpp"

namespace rsnet {

namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError("config: missing key '" + key + "'");
  return obj.at(key);
}

std::size_t read_count(const json& obj, const std::string& key) {
  const json& v = require(obj, key);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0)
    throw ConfigError("config: key '" + key + "' must be a positive integer");
  return v.get<std::size_t>();
}

double read_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config: key '" + key + "' must be a number");
  return v.get<double>();
}

Vec read_vector(const json& obj, const std::string& key, std::size_t expect) {
  const json& v = require(obj, key);
  if (!v.is_array() || v.size() != expect)
    throw ConfigError("config: key '" + key + "' must be an array of length " +
                      std::to_string(expect));
  Vec out(expect);
  for (std::size_t i = 0; i < expect; ++i) out[i] = read_number(v.at(i), key);
  return out;
}

}  // namespace

ModelConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");

  ModelConfig out;
  NetworkModel& m = out.model;
  m.num_classes = read_count(doc, "J");
  m.num_servers = read_count(doc, "K");

  const json& serves = require(doc, "serves");
  if (!serves.is_array() || serves.size() != m.num_servers)
    throw ConfigError("config: key 'serves' must be an array of length K");
  m.serves.resize(m.num_servers);
  for (std::size_t k = 0; k < m.num_servers; ++k) {
    const json& lst = serves.at(k);
    if (!lst.is_array())
      throw ConfigError("config: key 'serves' entries must be arrays");
    for (const json& e : lst) {
      if (!e.is_number_unsigned() || e.get<std::uint64_t>() < 1 ||
          e.get<std::uint64_t>() > m.num_classes)
        throw ConfigError("config: key 'serves' lists classes 1..J");
      m.serves[k].push_back(e.get<std::size_t>() - 1);
    }
  }

  const json& route = require(doc, "route");
  if (!route.is_array() || route.size() != m.num_classes)
    throw ConfigError("config: key 'route' must be an array of length J");
  m.route.resize(m.num_classes);
  for (std::size_t i = 0; i < m.num_classes; ++i) {
    const json& e = route.at(i);
    if (!e.is_number_unsigned() || e.get<std::uint64_t>() > m.num_classes)
      throw ConfigError("config: key 'route' entries must lie in 0..J (0 = exit)");
    const std::size_t r = e.get<std::size_t>();
    m.route[i] = (r == 0) ? kExit : static_cast<int>(r - 1);
  }

  m.lambda = read_vector(doc, "lambda", m.num_classes);
  m.mu = read_vector(doc, "mu", m.num_classes);
  m.c = read_number(require(doc, "c"), "c");

  const json& dom = require(doc, "domain");
  if (!dom.is_object()) throw ConfigError("config: key 'domain' must be an object");
  const json& kind = require(dom, "kind");
  if (kind == "rect") {
    out.domain = rect_domain(read_vector(dom, "z", m.num_classes));
  } else if (kind == "cap") {
    out.domain = cap_domain(read_vector(dom, "w", m.num_classes),
                            read_number(require(dom, "h"), "h"));
  } else {
    throw ConfigError("config: key 'domain.kind' must be 'rect' or 'cap'");
  }
  return out;
}

}  // namespace rsnet
