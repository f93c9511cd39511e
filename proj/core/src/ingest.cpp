#include "embkit/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>
#include <zlib.h>

namespace embkit::ingest {

namespace {

std::string inflate_gzip(const std::string& raw, const std::string& path) {
    z_stream zs{};
    // 15 window bits + 32: auto-detect gzip/zlib headers
    if (inflateInit2(&zs, 15 + 32) != Z_OK)
        throw DataError(path + ": inflateInit failed");
    std::string out;
    out.reserve(raw.size() * 4);
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(raw.data()));
    zs.avail_in = static_cast<uInt>(raw.size());
    char buf[1 << 16];
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw FormatError(path + ": gzip decompression failed (zlib rc " +
                              std::to_string(rc) + ")");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (rc != Z_STREAM_END && zs.avail_in > 0);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw FormatError(path + ": truncated gzip stream");
    return out;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        std::size_t end = nl;
        if (end > start && text[end - 1] == '\r') --end;
        lines.push_back(text.substr(start, end - start));
        start = nl + 1;
    }
    return lines;
}

} // namespace

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for reading: " + path);
    std::string raw(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{});
    if (raw.size() >= 2 && static_cast<unsigned char>(raw[0]) == 0x1f &&
        static_cast<unsigned char>(raw[1]) == 0x8b)
        raw = inflate_gzip(raw, path);
    return split_lines(raw);
}

CatalogParseResult parse_catalog(const std::vector<std::string>& lines,
                                 const CatalogParseOptions& opts) {
    CatalogParseResult result;
    std::unordered_map<std::string, std::size_t> seen; // id -> first line number
    auto reject = [&](std::size_t lineno, const std::string& why) {
        if (opts.policy == ErrorPolicy::abort_on_error)
            throw FormatError("catalog line " + std::to_string(lineno) + ": " + why);
        ++result.skipped_lines;
    };

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        const std::string& line = lines[i];
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            reject(lineno, std::string("malformed JSON: ") + e.what());
            continue;
        }
        if (!j.is_object() || !j.contains("product_id") || !j["product_id"].is_string()) {
            reject(lineno, "missing string field 'product_id'");
            continue;
        }
        ProductRecord rec;
        rec.id = j["product_id"].get<std::string>();
        try {
            validate_product_token(rec.id);
        } catch (const Error& e) {
            reject(lineno, e.what());
            continue;
        }
        if (auto it = seen.find(rec.id); it != seen.end()) {
            reject(lineno, "duplicate product_id '" + rec.id + "' (first seen on line " +
                               std::to_string(it->second) + ")");
            continue;
        }
        bool bad = false;
        for (int k = 0; k < kSiKeyCount && !bad; ++k) {
            auto key = kSiKeyNames[k];
            auto field = j.find(std::string(key));
            if (field == j.end() || field->is_null()) continue;
            if (!field->is_string()) {
                reject(lineno, "SI field '" + std::string(key) + "' is not a string");
                bad = true;
                break;
            }
            std::string value = canonical_si_value(field->get<std::string>());
            if (!value.empty()) rec.set_attr(static_cast<SiKey>(k), std::move(value));
        }
        if (bad) continue;
        seen.emplace(rec.id, lineno);
        result.records.push_back(std::move(rec));
    }
    return result;
}

CatalogParseResult parse_catalog_file(const std::string& path, const CatalogParseOptions& opts) {
    return parse_catalog(read_lines(path), opts);
}

EventParseResult parse_events(const std::vector<std::string>& lines,
                              const EventParseOptions& opts) {
    EventParseResult result;
    auto reject = [&](std::size_t lineno, const std::string& why) {
        if (opts.policy == ErrorPolicy::abort_on_error)
            throw FormatError("events line " + std::to_string(lineno) + ": " + why);
        ++result.skipped_lines;
    };

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        const std::string& line = lines[i];
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            reject(lineno, std::string("malformed JSON: ") + e.what());
            continue;
        }
        auto str_field = [&](const char* name, std::string& out) {
            if (!j.contains(name) || !j[name].is_string()) return false;
            out = j[name].get<std::string>();
            return !out.empty();
        };
        Event ev;
        std::string type_name;
        if (!str_field("user_id", ev.user_id) || !str_field("product_id", ev.product_id) ||
            !str_field("event_type", type_name) || !str_field("session_id", ev.session_id)) {
            reject(lineno, "missing one of user_id/product_id/event_type/session_id");
            continue;
        }
        auto type = parse_event_type(type_name);
        if (!type) {
            reject(lineno, "unknown event_type '" + type_name + "'");
            continue;
        }
        ev.type = *type;
        if (!j.contains("ts") || !j["ts"].is_number_integer()) {
            reject(lineno, "missing integer field 'ts'");
            continue;
        }
        ev.ts = j["ts"].get<std::int64_t>();
        if (ev.ts < 0) {
            reject(lineno, "negative timestamp");
            continue;
        }
        if (j.contains("returned") && j["returned"].is_boolean())
            ev.returned = j["returned"].get<bool>();

        if (opts.catalog && !opts.catalog->contains(ev.product_id)) {
            ++result.uncataloged_count;
            if (opts.strict_catalog) continue;
        }
        result.events.push_back(std::move(ev));
    }
    return result;
}

EventParseResult parse_events_file(const std::string& path, const EventParseOptions& opts) {
    return parse_events(read_lines(path), opts);
}

std::vector<LifetimeList> build_lifetime_lists(const std::vector<Event>& events,
                                               int min_purchases) {
    std::vector<std::string> user_order;
    std::unordered_map<std::string, std::vector<const Event*>> per_user;
    for (const Event& ev : events) {
        if (ev.type == EventType::click) continue;
        auto [it, fresh] = per_user.try_emplace(ev.user_id);
        if (fresh) user_order.push_back(ev.user_id);
        it->second.push_back(&ev);
    }

    std::vector<LifetimeList> lists;
    for (const std::string& user : user_order) {
        auto& evs = per_user[user];
        std::stable_sort(evs.begin(), evs.end(),
                         [](const Event* a, const Event* b) { return a->ts < b->ts; });
        std::unordered_set<std::string> purchased;
        for (const Event* ev : evs)
            if (ev->type == EventType::purchase) purchased.insert(ev->product_id);
        if (static_cast<int>(purchased.size()) < min_purchases) continue;
        LifetimeList list;
        list.user_id = user;
        list.items.reserve(evs.size());
        for (const Event* ev : evs)
            list.items.push_back(LifetimeItem{ev->product_id, ev->type, ev->ts});
        lists.push_back(std::move(list));
    }
    return lists;
}

std::size_t distinct_purchases(const std::vector<Event>& user_events) {
    std::unordered_set<std::string> products;
    for (const Event& ev : user_events)
        if (ev.type == EventType::purchase) products.insert(ev.product_id);
    return products.size();
}

std::vector<Session> build_sessions(const std::vector<Event>& events) {
    std::vector<std::string> session_order;
    std::unordered_map<std::string, Session> by_id;
    for (const Event& ev : events) {
        auto [it, fresh] = by_id.try_emplace(ev.session_id);
        Session& s = it->second;
        if (fresh) {
            s.session_id = ev.session_id;
            s.user_id = ev.user_id;
            session_order.push_back(ev.session_id);
        } else if (s.user_id != ev.user_id) {
            throw IntegrityError("session '" + ev.session_id + "' spans users '" + s.user_id +
                                 "' and '" + ev.user_id + "'");
        }
        s.events.push_back(ev);
    }
    std::vector<Session> sessions;
    sessions.reserve(session_order.size());
    for (const std::string& id : session_order) {
        Session& s = by_id[id];
        std::stable_sort(s.events.begin(), s.events.end(),
                         [](const Event& a, const Event& b) { return a.ts < b.ts; });
        sessions.push_back(std::move(s));
    }
    return sessions;
}

} // namespace embkit::ingest
