#include "cgbp/instance_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace cgbp {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& field, const std::string& message) {
  throw InputError(field + ": " + message, 0, 0, field);
}

const json& member(const json& obj, const std::string& at, const char* key) {
  if (!obj.is_object()) schema_error(at.empty() ? "/" : at, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(at + "/" + key, "missing required field");
  return *it;
}

int as_int(const json& v, const std::string& at) {
  if (!v.is_number()) schema_error(at, "expected an integer");
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (!std::isfinite(d) || d != std::floor(d)) schema_error(at, "expected an integer");
    if (std::abs(d) > 2e9) schema_error(at, "integer out of range");
    return static_cast<int>(d);
  }
  if (v.is_number_unsigned() ? v.get<std::uint64_t>() > 2000000000ULL
                             : std::llabs(v.get<std::int64_t>()) > 2000000000LL) {
    schema_error(at, "integer out of range");
  }
  return v.get<int>();
}

double as_number(const json& v, const std::string& at) {
  if (!v.is_number()) schema_error(at, "expected a number");
  return v.get<double>();
}

const json& as_array(const json& v, const std::string& at) {
  if (!v.is_array()) schema_error(at, "expected an array");
  return v;
}

CuttingStockInstance parse_cutting_stock(const json& doc) {
  CuttingStockInstance inst;
  inst.roll_width = as_int(member(doc, "", "roll_width"), "/roll_width");
  const json& items = as_array(member(doc, "", "items"), "/items");
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string at = "/items/" + std::to_string(i);
    CuttingStockItem item;
    item.size = as_int(member(items[i], at, "size"), at + "/size");
    item.demand = as_int(member(items[i], at, "demand"), at + "/demand");
    inst.items.push_back(item);
  }
  return inst;
}

NetPathInstance parse_net_path(const json& doc) {
  NetPathInstance inst;
  inst.nodes = as_int(member(doc, "", "nodes"), "/nodes");
  const json& arcs = as_array(member(doc, "", "arcs"), "/arcs");
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    const std::string at = "/arcs/" + std::to_string(a);
    NetArc arc;
    arc.from = as_int(member(arcs[a], at, "from"), at + "/from");
    arc.to = as_int(member(arcs[a], at, "to"), at + "/to");
    arc.cost = as_number(member(arcs[a], at, "cost"), at + "/cost");
    arc.capacity = as_int(member(arcs[a], at, "capacity"), at + "/capacity");
    inst.arcs.push_back(arc);
  }
  const json& tasks = as_array(member(doc, "", "tasks"), "/tasks");
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const std::string at = "/tasks/" + std::to_string(k);
    NetTask task;
    task.src = as_int(member(tasks[k], at, "src"), at + "/src");
    task.dst = as_int(member(tasks[k], at, "dst"), at + "/dst");
    task.demand = as_int(member(tasks[k], at, "demand"), at + "/demand");
    if (tasks[k].contains("max_hops") && !tasks[k]["max_hops"].is_null()) {
      task.max_hops = as_int(tasks[k]["max_hops"], at + "/max_hops");
    }
    inst.tasks.push_back(task);
  }
  return inst;
}

}  // namespace

Instance parse_instance(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1, column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw InputError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": malformed JSON",
                     line, column, "");
  }
  const std::string type = [&] {
    const json& t = member(doc, "", "type");
    if (!t.is_string()) schema_error("/type", "expected a string");
    return t.get<std::string>();
  }();
  Instance inst;
  if (type == "cutting_stock") {
    inst = parse_cutting_stock(doc);
  } else if (type == "net_path") {
    inst = parse_net_path(doc);
  } else {
    schema_error("/type", "unknown instance type '" + type + "'");
  }
  try {
    check_instance(inst);
  } catch (const InstanceError& e) {
    throw InputError(e.what(), 0, 0, e.field());
  }
  return inst;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path, 0, 0, "");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

json instance_to_json(const Instance& instance) {
  json doc;
  if (const auto* cs = std::get_if<CuttingStockInstance>(&instance)) {
    doc["type"] = "cutting_stock";
    doc["roll_width"] = cs->roll_width;
    doc["items"] = json::array();
    for (const auto& it : cs->items) doc["items"].push_back({{"size", it.size}, {"demand", it.demand}});
    return doc;
  }
  const auto& np = std::get<NetPathInstance>(instance);
  doc["type"] = "net_path";
  doc["nodes"] = np.nodes;
  doc["arcs"] = json::array();
  for (const auto& a : np.arcs) {
    doc["arcs"].push_back({{"from", a.from}, {"to", a.to}, {"cost", a.cost}, {"capacity", a.capacity}});
  }
  doc["tasks"] = json::array();
  for (const auto& t : np.tasks) {
    json task = {{"src", t.src}, {"dst", t.dst}, {"demand", t.demand}};
    if (t.max_hops >= 0) task["max_hops"] = t.max_hops;
    doc["tasks"].push_back(task);
  }
  return doc;
}

std::string dump_instance(const Instance& instance) {
  return instance_to_json(instance).dump(2) + "\n";
}

}  // namespace cgbp
