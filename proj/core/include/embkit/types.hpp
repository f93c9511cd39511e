#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "embkit/errors.hpp"

namespace embkit {

// ---------------------------------------------------------------------------
// Side information
// ---------------------------------------------------------------------------

/// The closed six-key attribute set carried by every catalog record.
enum class SiKey : int {
    brand = 0,
    basecolor = 1,
    fabric = 2,
    priceband = 3,
    neck = 4,
    pattern = 5,
};

inline constexpr int kSiKeyCount = 6;

inline constexpr std::array<std::string_view, kSiKeyCount> kSiKeyNames = {
    "brand", "basecolor", "fabric", "priceband", "neck", "pattern",
};

inline std::string_view si_key_name(SiKey k) {
    return kSiKeyNames[static_cast<int>(k)];
}

/// Parses a key name; returns nullopt for anything outside the closed set.
std::optional<SiKey> parse_si_key(std::string_view name);

/// One catalog attribute as a vocabulary token, serialized as "key=value".
struct SideInfoToken {
    SiKey key;
    std::string value;

    std::string canonical() const {
        return std::string(si_key_name(key)) + "=" + value;
    }

    bool operator==(const SideInfoToken&) const = default;
};

/// SI tokens are the only tokens that contain '='; product ids never do.
inline bool is_si_token(std::string_view token) {
    return token.find('=') != std::string_view::npos;
}

/// Lower-cases, trims, and collapses internal whitespace runs to '_' so that
/// every vocabulary token is whitespace-free ("Round Neck" -> "round_neck").
std::string canonical_si_value(std::string_view raw);

/// Validates a product id: non-empty, no whitespace, no '='.
void validate_product_token(std::string_view token);

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// One catalog entry: product id plus up to six side-information attributes.
struct ProductRecord {
    std::string id;
    std::array<std::optional<std::string>, kSiKeyCount> si;

    const std::optional<std::string>& attr(SiKey k) const {
        return si[static_cast<int>(k)];
    }
    void set_attr(SiKey k, std::string value) {
        si[static_cast<int>(k)] = std::move(value);
    }

    /// Present attributes as canonical tokens, in SiKey order.
    std::vector<SideInfoToken> si_tokens() const;

    int si_count() const {
        int n = 0;
        for (const auto& v : si)
            if (v) ++n;
        return n;
    }
};

/// Record list plus an id index. Records keep file order.
class Catalog {
public:
    Catalog() = default;
    explicit Catalog(std::vector<ProductRecord> records);

    const std::vector<ProductRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool contains(std::string_view id) const {
        return index_.find(std::string(id)) != index_.end();
    }
    /// Throws NotFoundError for unknown ids.
    const ProductRecord& record(std::string_view id) const;
    const ProductRecord* find(std::string_view id) const;

private:
    std::vector<ProductRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Clickstream
// ---------------------------------------------------------------------------

enum class EventType : int { click = 0, bag = 1, purchase = 2 };

inline constexpr std::array<std::string_view, 3> kEventTypeNames = {
    "click", "bag", "purchase"};

inline std::string_view event_type_name(EventType t) {
    return kEventTypeNames[static_cast<int>(t)];
}

std::optional<EventType> parse_event_type(std::string_view name);

/// One user interaction. `returned` is an optional extension field used by
/// real-data return labels; synthetic labels live in the ground-truth file.
struct Event {
    std::string user_id;
    std::string product_id;
    EventType type = EventType::click;
    std::string session_id;
    std::int64_t ts = 0;
    std::optional<bool> returned;
};

/// One bag/purchase item of a user's lifetime list.
struct LifetimeItem {
    std::string product_id;
    EventType type = EventType::bag; // bag or purchase only
    std::int64_t ts = 0;
};

/// Timestamp-ordered bag/purchase products of one user across their history.
struct LifetimeList {
    std::string user_id;
    std::vector<LifetimeItem> items;

    std::vector<std::string> tokens() const {
        std::vector<std::string> out;
        out.reserve(items.size());
        for (const auto& it : items) out.push_back(it.product_id);
        return out;
    }
};

/// All events of one session, timestamp-ordered, single user.
struct Session {
    std::string session_id;
    std::string user_id;
    std::vector<Event> events;
};

} // namespace embkit
