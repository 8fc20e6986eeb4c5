#pragma once

// Annotation XML reader/writer and corpus directory helpers.
//
//   <roadScene id="..." environment="Real|Virtual">
//     <context zebraCrossing="true|false" lanes="N" surroundings="Vegetation|Clear"/>
//     <frame number="N" pedestriansScene="...">
//       <pedestrian id="..." occlusion="None|Partial|Full" visibleFraction="0.xx"/>
//       <vehicle id="..." state="..." brakingLights="On|Off" distance="..." position="..."/>
//     </frame>
//   </roadScene>

#include <expat.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "occlukg/error.hpp"
#include "occlukg/scene.hpp"

namespace occlukg {

namespace detail {

struct ExpatDeleter {
    void operator()(XML_Parser p) const noexcept { XML_ParserFree(p); }
};
using ExpatHandle = std::unique_ptr<std::remove_pointer_t<XML_Parser>, ExpatDeleter>;

class SceneXmlReader {
public:
    RoadSceneDocument read(std::string_view bytes) {
        ExpatHandle parser(XML_ParserCreate("UTF-8"));
        if (!parser) throw Error("could not allocate XML parser");
        parser_ = parser.get();
        XML_SetUserData(parser_, this);
        XML_SetElementHandler(parser_, &SceneXmlReader::on_start, &SceneXmlReader::on_end);
        XML_SetCharacterDataHandler(parser_, &SceneXmlReader::on_text);

        const auto status = XML_Parse(parser_, bytes.data(), static_cast<int>(bytes.size()), XML_TRUE);
        if (pending_) std::rethrow_exception(pending_);
        if (status != XML_STATUS_OK) {
            throw ParseError(XML_ErrorString(XML_GetErrorCode(parser_)),
                             static_cast<std::size_t>(XML_GetCurrentLineNumber(parser_)),
                             static_cast<std::size_t>(XML_GetCurrentColumnNumber(parser_)) + 1);
        }
        if (!saw_root_) throw ValidationError("roadScene", "missing root element");
        return std::move(doc_);
    }

private:
    using Attributes = std::map<std::string, std::string>;

    static void on_start(void* self, const XML_Char* name, const XML_Char** atts) {
        static_cast<SceneXmlReader*>(self)->guarded([&](SceneXmlReader& r) { r.start(name, atts); });
    }
    static void on_end(void* self, const XML_Char* name) {
        static_cast<SceneXmlReader*>(self)->guarded([&](SceneXmlReader& r) { r.end(name); });
    }
    static void on_text(void* self, const XML_Char* s, int len) {
        static_cast<SceneXmlReader*>(self)->guarded([&](SceneXmlReader& r) { r.text(std::string_view(s, len)); });
    }

    // Expat callbacks are C frames; exceptions must not cross them.
    template <typename F>
    void guarded(F&& f) {
        if (pending_) return;
        try {
            f(*this);
        } catch (...) {
            pending_ = std::current_exception();
            XML_StopParser(parser_, XML_FALSE);
        }
    }

    [[noreturn]] void fail(const std::string& element, const std::string& rule) const {
        const auto line = XML_GetCurrentLineNumber(parser_);
        throw ValidationError(element, rule + " (line " + std::to_string(line) + ")");
    }

    static Attributes collect(const XML_Char** atts) {
        Attributes out;
        for (std::size_t i = 0; atts[i] != nullptr; i += 2) out.emplace(atts[i], atts[i + 1]);
        return out;
    }

    void require_only(const std::string& element, const Attributes& atts,
                      std::initializer_list<std::string_view> allowed) const {
        for (const auto& [key, value] : atts) {
            if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
                fail(element, "unknown attribute '" + key + "'");
            }
        }
    }

    const std::string& required(const std::string& element, const Attributes& atts, const std::string& key) const {
        auto it = atts.find(key);
        if (it == atts.end()) fail(element, "missing attribute '" + key + "'");
        return it->second;
    }

    template <typename E>
    E enum_attr(const std::string& element, const Attributes& atts, const std::string& key) const {
        const auto& text = required(element, atts, key);
        auto value = enum_from_string<E>(text);
        if (!value) fail(element, "invalid value '" + text + "' for attribute '" + key + "'");
        return *value;
    }

    template <typename Int>
    Int int_attr(const std::string& element, const Attributes& atts, const std::string& key) const {
        const auto& text = required(element, atts, key);
        Int value{};
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size()) {
            fail(element, "attribute '" + key + "' is not an integer: '" + text + "'");
        }
        return value;
    }

    double real_attr(const std::string& element, const std::string& key, const std::string& text) const {
        double value{};
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
            fail(element, "attribute '" + key + "' is not a real number: '" + text + "'");
        }
        return value;
    }

    void start(const std::string& name, const XML_Char** raw) {
        const Attributes atts = collect(raw);
        const std::string parent = stack_.empty() ? std::string{} : stack_.back();
        stack_.push_back(name);

        if (name == "roadScene") {
            if (!parent.empty() || saw_root_) fail(name, "roadScene must be the single root element");
            saw_root_ = true;
            require_only(name, atts, {"id", "environment"});
            doc_.context.scene_id = required(name, atts, "id");
            if (!is_valid_identifier(doc_.context.scene_id)) {
                fail(name, "scene id must be non-empty and use only [A-Za-z0-9_.-]");
            }
            doc_.context.environment = enum_attr<Environment>(name, atts, "environment");
        } else if (name == "context") {
            if (parent != "roadScene") fail(name, "context must be a child of roadScene");
            if (saw_context_) fail(name, "duplicate context element");
            if (!doc_.frames.empty()) fail(name, "context must precede frames");
            saw_context_ = true;
            require_only(name, atts, {"zebraCrossing", "lanes", "surroundings"});
            const auto& zebra = required(name, atts, "zebraCrossing");
            if (zebra != "true" && zebra != "false") fail(name, "zebraCrossing must be 'true' or 'false'");
            doc_.context.zebra_crossing = zebra == "true";
            doc_.context.lanes = int_attr<int>(name, atts, "lanes");
            if (doc_.context.lanes < 1) fail(name, "lanes must be >= 1");
            doc_.context.surroundings = enum_attr<Surroundings>(name, atts, "surroundings");
        } else if (name == "frame") {
            if (parent != "roadScene") fail(name, "frame must be a child of roadScene");
            if (!saw_context_) fail(name, "context must precede frames");
            require_only(name, atts, {"number", "pedestriansScene"});
            FrameAnnotation frame;
            frame.frame_number = int_attr<std::int64_t>(name, atts, "number");
            if (frame.frame_number < 0) fail(name, "frame number must be non-negative");
            if (!doc_.frames.empty() && frame.frame_number <= doc_.frames.back().frame_number) {
                fail(name, "frames not strictly increasing");
            }
            frame.pedestrians_scene = enum_attr<PedestriansScene>(name, atts, "pedestriansScene");
            doc_.frames.push_back(std::move(frame));
        } else if (name == "pedestrian") {
            if (parent != "frame") fail(name, "pedestrian must be a child of frame");
            require_only(name, atts, {"id", "occlusion", "visibleFraction"});
            PedestrianRecord ped;
            ped.pedestrian_id = required(name, atts, "id");
            if (!is_valid_identifier(ped.pedestrian_id)) fail(name, "invalid pedestrian id");
            ped.occlusion = enum_attr<Occlusion>(name, atts, "occlusion");
            if (auto it = atts.find("visibleFraction"); it != atts.end()) {
                const double v = real_attr(name, "visibleFraction", it->second);
                if (v < 0.0 || v > 1.0) fail(name, "visibleFraction outside [0,1]");
                ped.visible_fraction = v;
            }
            auto& peds = doc_.frames.back().pedestrians;
            for (const auto& other : peds) {
                if (other.pedestrian_id == ped.pedestrian_id) fail(name, "duplicate pedestrian id in frame");
            }
            peds.push_back(std::move(ped));
        } else if (name == "vehicle") {
            if (parent != "frame") fail(name, "vehicle must be a child of frame");
            require_only(name, atts, {"id", "state", "brakingLights", "distance", "position"});
            VehicleRecord veh;
            veh.vehicle_id = required(name, atts, "id");
            if (!is_valid_identifier(veh.vehicle_id)) fail(name, "invalid vehicle id");
            veh.state = enum_attr<VehicleState>(name, atts, "state");
            veh.braking_lights = enum_attr<BrakingLights>(name, atts, "brakingLights");
            veh.distance = enum_attr<Distance>(name, atts, "distance");
            veh.position = enum_attr<Position>(name, atts, "position");
            auto& vehs = doc_.frames.back().vehicles;
            for (const auto& other : vehs) {
                if (other.vehicle_id == veh.vehicle_id) fail(name, "duplicate vehicle id in frame");
            }
            vehs.push_back(std::move(veh));
        } else {
            fail(name, "unknown element");
        }
    }

    void end(const std::string& name) {
        stack_.pop_back();
        if (name == "frame") {
            const auto& frame = doc_.frames.back();
            if (frame.pedestrians_scene == PedestriansScene::NonePedestrian && !frame.pedestrians.empty()) {
                fail(name, "NonePedestrian frame lists pedestrians");
            }
            if (frame.pedestrians_scene == PedestriansScene::PedestrianOccluded &&
                std::none_of(frame.pedestrians.begin(), frame.pedestrians.end(),
                             [](const PedestrianRecord& p) { return p.occlusion != Occlusion::None; })) {
                fail(name, "PedestrianOccluded frame has no occluded pedestrian");
            }
        } else if (name == "roadScene") {
            if (!saw_context_) fail(name, "missing context element");
            if (doc_.frames.empty()) fail(name, "document must contain at least one frame");
        }
    }

    void text(std::string_view s) {
        const bool blank = std::all_of(s.begin(), s.end(), [](char c) {
            return c == ' ' || c == '\t' || c == '\n' || c == '\r';
        });
        if (!blank) fail(stack_.empty() ? std::string("roadScene") : stack_.back(), "unexpected text content");
    }

    XML_Parser parser_ = nullptr;
    std::exception_ptr pending_;
    std::vector<std::string> stack_;
    RoadSceneDocument doc_;
    bool saw_root_ = false;
    bool saw_context_ = false;
};

inline void append_escaped(std::string& out, std::string_view text) {
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
}

inline void append_attr(std::string& out, std::string_view key, std::string_view value) {
    out += ' ';
    out += key;
    out += "=\"";
    append_escaped(out, value);
    out += '"';
}

// Shortest representation that parses back to the same double.
inline std::string format_real(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

}  // namespace detail

inline RoadSceneDocument parse_scene_xml(std::string_view bytes) {
    return detail::SceneXmlReader{}.read(bytes);
}

inline std::string serialize_scene_xml(const RoadSceneDocument& doc) {
    using detail::append_attr;
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<roadScene";
    append_attr(out, "id", doc.context.scene_id);
    append_attr(out, "environment", to_string(doc.context.environment));
    out += ">\n  <context";
    append_attr(out, "zebraCrossing", doc.context.zebra_crossing ? "true" : "false");
    append_attr(out, "lanes", std::to_string(doc.context.lanes));
    append_attr(out, "surroundings", to_string(doc.context.surroundings));
    out += "/>\n";
    for (const auto& frame : doc.frames) {
        out += "  <frame";
        append_attr(out, "number", std::to_string(frame.frame_number));
        append_attr(out, "pedestriansScene", to_string(frame.pedestrians_scene));
        if (frame.pedestrians.empty() && frame.vehicles.empty()) {
            out += "/>\n";
            continue;
        }
        out += ">\n";
        for (const auto& ped : frame.pedestrians) {
            out += "    <pedestrian";
            append_attr(out, "id", ped.pedestrian_id);
            append_attr(out, "occlusion", to_string(ped.occlusion));
            if (ped.visible_fraction) append_attr(out, "visibleFraction", detail::format_real(*ped.visible_fraction));
            out += "/>\n";
        }
        for (const auto& veh : frame.vehicles) {
            out += "    <vehicle";
            append_attr(out, "id", veh.vehicle_id);
            append_attr(out, "state", to_string(veh.state));
            append_attr(out, "brakingLights", to_string(veh.braking_lights));
            append_attr(out, "distance", to_string(veh.distance));
            append_attr(out, "position", to_string(veh.position));
            out += "/>\n";
        }
        out += "  </frame>\n";
    }
    out += "</roadScene>\n";
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Creates missing parent directories.
inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + path.string());
}

inline RoadSceneDocument load_scene(const std::filesystem::path& path) {
    try {
        return parse_scene_xml(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.filename().string() + ": " + e.what(), e.line(), e.column());
    } catch (const ValidationError& e) {
        throw ValidationError(e.element(), path.filename().string() + ": " + e.rule());
    }
}

// Sorted list of *.xml files directly inside `dir`.
inline std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw Error("corpus directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".xml") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

// Loads every document; scene ids must be unique within the corpus.
inline std::vector<RoadSceneDocument> load_corpus(const std::filesystem::path& dir) {
    std::vector<RoadSceneDocument> corpus;
    std::set<std::string> ids;
    for (const auto& file : corpus_files(dir)) {
        corpus.push_back(load_scene(file));
        if (!ids.insert(corpus.back().context.scene_id).second) {
            throw ValidationError("roadScene", file.filename().string() + ": duplicate scene id '" +
                                                   corpus.back().context.scene_id + "' in corpus");
        }
    }
    return corpus;
}

inline void write_corpus(const std::filesystem::path& dir, const std::vector<RoadSceneDocument>& corpus) {
    std::filesystem::create_directories(dir);
    for (const auto& doc : corpus) write_file(dir / (doc.context.scene_id + ".xml"), serialize_scene_xml(doc));
}

}  // namespace occlukg
