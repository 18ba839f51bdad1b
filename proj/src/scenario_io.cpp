#include <set>
#include <string>

#include "json.hpp"
#include "keyterrain/errors.hpp"
#include "keyterrain/network.hpp"

namespace keyterrain {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ParseError(where.empty() ? what : where + ": " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) fail(where, "unknown key \"" + key + "\"");
    }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(where, "missing key \"" + key + "\"");
    return *it;
}

double number(const json& obj, const std::string& key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number()) fail(where, "\"" + key + "\" must be a number");
    return v.get<double>();
}

long long integer(const json& obj, const std::string& key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number_integer()) fail(where, "\"" + key + "\" must be an integer");
    return v.get<long long>();
}

int small_int(const json& obj, const std::string& key, const std::string& where) {
    long long v = integer(obj, key, where);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        fail(where, "\"" + key + "\" out of range");
    }
    return static_cast<int>(v);
}

const json& array(const json& obj, const std::string& key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_array()) fail(where, "\"" + key + "\" must be an array");
    return v;
}

}  // namespace

Scenario load_scenario(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail("", "top level must be an object");
    reject_unknown(doc,
                   {"towns", "roads", "enemy_towns", "budget", "num_units", "deployment_mean_s",
                    "mobility", "unit_speed_mps", "seed"},
                   "");

    Scenario s;
    s.unit_speed = number(doc, "unit_speed_mps", "");

    std::vector<Town> towns;
    const json& jtowns = array(doc, "towns", "");
    for (std::size_t i = 0; i < jtowns.size(); ++i) {
        const std::string where = "towns[" + std::to_string(i) + "]";
        const json& jt = jtowns[i];
        if (!jt.is_object()) fail(where, "must be an object");
        reject_unknown(jt, {"id", "x", "y", "radius", "deployment_s"}, where);
        Town t;
        t.id = small_int(jt, "id", where);
        t.x = number(jt, "x", where);
        t.y = number(jt, "y", where);
        t.radius = number(jt, "radius", where);
        if (jt.contains("deployment_s")) t.deployment = number(jt, "deployment_s", where);
        towns.push_back(t);
    }

    std::vector<Road> roads;
    std::set<std::pair<TownId, TownId>> seen;
    const json& jroads = array(doc, "roads", "");
    for (std::size_t i = 0; i < jroads.size(); ++i) {
        const std::string where = "roads[" + std::to_string(i) + "]";
        const json& jr = jroads[i];
        if (!jr.is_object()) fail(where, "must be an object");
        reject_unknown(jr, {"a", "b", "length", "travel_time"}, where);
        Road r;
        r.a = small_int(jr, "a", where);
        r.b = small_int(jr, "b", where);
        r.length = number(jr, "length", where);
        if (jr.contains("travel_time")) {
            r.travel_time = number(jr, "travel_time", where);
            r.travel_time_override = true;
        } else {
            r.travel_time = r.length / s.unit_speed;
        }
        auto key = std::minmax(r.a, r.b);
        if (!seen.insert({key.first, key.second}).second) {
            fail(where, "duplicate road {" + std::to_string(key.first) + "," +
                            std::to_string(key.second) + "}");
        }
        roads.push_back(r);
    }
    s.network = RoadNetwork(std::move(towns), std::move(roads));

    const json& jenemy = array(doc, "enemy_towns", "");
    for (std::size_t i = 0; i < jenemy.size(); ++i) {
        if (!jenemy[i].is_number_integer()) {
            fail("enemy_towns[" + std::to_string(i) + "]", "must be an integer");
        }
        s.enemy_towns.push_back(jenemy[i].get<TownId>());
    }
    s.budget = small_int(doc, "budget", "");
    s.num_units = small_int(doc, "num_units", "");
    s.deployment_mean = number(doc, "deployment_mean_s", "");
    const json& jm = require(doc, "mobility", "");
    if (!jm.is_string()) fail("", "\"mobility\" must be a string");
    s.mobility = parse_mobility(jm.get<std::string>());
    const json& jseed = require(doc, "seed", "");
    if (!jseed.is_number_unsigned()) fail("", "\"seed\" must be a non-negative integer");
    s.seed = jseed.get<std::uint64_t>();
    return s;
}

std::string save_scenario(const Scenario& s) {
    ordered_json doc;
    ordered_json towns = ordered_json::array();
    for (const Town& t : s.network.towns()) {
        ordered_json jt{{"id", t.id}, {"x", t.x}, {"y", t.y}, {"radius", t.radius}};
        if (t.deployment) jt["deployment_s"] = *t.deployment;
        towns.push_back(std::move(jt));
    }
    ordered_json roads = ordered_json::array();
    for (const Road& r : s.network.roads()) {
        ordered_json jr{{"a", r.a}, {"b", r.b}, {"length", r.length}};
        if (r.travel_time_override) jr["travel_time"] = r.travel_time;
        roads.push_back(std::move(jr));
    }
    doc["towns"] = std::move(towns);
    doc["roads"] = std::move(roads);
    doc["enemy_towns"] = s.enemy_towns;
    doc["budget"] = s.budget;
    doc["num_units"] = s.num_units;
    doc["deployment_mean_s"] = s.deployment_mean;
    doc["mobility"] = to_string(s.mobility);
    doc["unit_speed_mps"] = s.unit_speed;
    doc["seed"] = s.seed;
    return doc.dump(2) + "\n";
}

}  // namespace keyterrain
