#include "radreason/ckg_io.hpp"

#include <fstream>
#include <sstream>

namespace radreason {

using nlohmann::json;

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
}

std::string canonical_dump(const json& value) {
    // nlohmann::json objects are std::map-backed, so keys are already sorted.
    return value.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(ErrorKind::schema, where + ": missing \"" + key + "\"");
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_string()) throw Error(ErrorKind::schema, where + ": \"" + key + "\" must be a string");
    return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(ErrorKind::schema, where + ": \"" + key + "\" must be a string");
    return it->get<std::string>();
}

const json& require_array(const json& obj, const char* key) {
    const json& v = require(obj, key, "ckg");
    if (!v.is_array()) throw Error(ErrorKind::schema, std::string("ckg: \"") + key + "\" must be an array");
    return v;
}

}  // namespace

CkgDocument parse_ckg_document(const json& document) {
    if (!document.is_object()) throw Error(ErrorKind::schema, "ckg: document must be a JSON object");
    CkgDocument doc;

    for (const auto& r : require_array(document, "radicals")) {
        if (!r.is_object()) throw Error(ErrorKind::schema, "ckg: radical entries must be objects");
        RadicalInfo info{RadicalId(require_string(r, "id", "radical")), optional_string(r, "name", "radical")};
        doc.radicals.push_back(std::move(info));
    }
    for (const auto& s : require_array(document, "structures")) {
        if (!s.is_object()) throw Error(ErrorKind::schema, "ckg: structure entries must be objects");
        StructureInfo info{StructureId(require_string(s, "id", "structure")), optional_string(s, "name", "structure"),
                           std::nullopt};
        if (auto it = s.find("arity"); it != s.end() && !it->is_null()) {
            if (!it->is_number_integer()) {
                throw Error(ErrorKind::schema, "structure '" + info.id.str() + "': arity must be an integer");
            }
            info.arity = it->get<int>();
        }
        doc.structures.push_back(std::move(info));
    }
    for (const auto& c : require_array(document, "characters")) {
        if (!c.is_object()) throw Error(ErrorKind::schema, "ckg: character entries must be objects");
        CharacterEntry entry;
        entry.id = CharId(require_string(c, "id", "character"));
        const std::string where = "character '" + entry.id.str() + "'";
        const json& rads = require(c, "radicals", where);
        if (!rads.is_array()) throw Error(ErrorKind::schema, where + ": \"radicals\" must be an array");
        for (const auto& r : rads) {
            if (!r.is_string()) throw Error(ErrorKind::schema, where + ": radical ids must be strings");
            entry.radicals.emplace_back(r.get<std::string>());
        }
        entry.structure = StructureId(require_string(c, "structure", where));
        entry.source = optional_string(c, "source", where);
        doc.characters.push_back(std::move(entry));
    }
    return doc;
}

Ckg load_ckg(const json& document) { return Ckg::build(parse_ckg_document(document)); }

Ckg load_ckg_file(const std::filesystem::path& path) { return load_ckg(read_json_file(path)); }

json to_json(const CkgDocument& document) {
    json radicals = json::array();
    for (const auto& r : document.radicals) {
        json o{{"id", r.id.str()}};
        if (r.name) o["name"] = *r.name;
        radicals.push_back(std::move(o));
    }
    json structures = json::array();
    for (const auto& s : document.structures) {
        json o{{"id", s.id.str()}};
        if (s.name) o["name"] = *s.name;
        if (s.arity) o["arity"] = *s.arity;
        structures.push_back(std::move(o));
    }
    json characters = json::array();
    for (const auto& c : document.characters) {
        json rads = json::array();
        for (const auto& r : c.radicals) rads.push_back(r.str());
        json o{{"id", c.id.str()}, {"radicals", std::move(rads)}, {"structure", c.structure.str()}};
        if (c.source) o["source"] = *c.source;
        characters.push_back(std::move(o));
    }
    return json{{"radicals", std::move(radicals)}, {"structures", std::move(structures)},
                {"characters", std::move(characters)}};
}

json to_json(const Ckg& ckg) { return to_json(ckg.to_document()); }

std::string serialize_ckg(const Ckg& ckg) { return canonical_dump(to_json(ckg)); }

void save_ckg_file(const Ckg& ckg, const std::filesystem::path& path) { write_text_file(path, serialize_ckg(ckg)); }

json to_json(const ValidationReport& report) {
    json issues = json::array();
    for (const auto& i : report.issues) {
        issues.push_back({{"severity", i.severity == Severity::error ? "error" : "warning"},
                          {"category", std::string(to_string(i.category))},
                          {"entity", i.entity},
                          {"message", i.message}});
    }
    return json{{"ok", report.ok}, {"issues", std::move(issues)}};
}

json to_json(const CkgStats& stats) {
    json usage = json::object();
    for (const auto& [id, n] : stats.radical_usage) usage[id] = n;
    json counts = json::object();
    for (const auto& [k, n] : stats.radical_count_histogram) counts[std::to_string(k)] = n;
    return json{{"n_characters", stats.n_characters},
                {"n_radicals", stats.n_radicals},
                {"n_structures", stats.n_structures},
                {"n_radicals_used", stats.n_radicals_used},
                {"n_structures_used", stats.n_structures_used},
                {"radical_usage", std::move(usage)},
                {"characters_per_radical_count", std::move(counts)}};
}

}  // namespace radreason
