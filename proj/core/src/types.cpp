#include "embkit/types.hpp"

#include <cctype>

namespace embkit {

std::optional<SiKey> parse_si_key(std::string_view name) {
    for (int i = 0; i < kSiKeyCount; ++i) {
        if (name == kSiKeyNames[i]) return static_cast<SiKey>(i);
    }
    return std::nullopt;
}

std::string canonical_si_value(std::string_view raw) {
    std::size_t b = 0, e = raw.size();
    while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
    std::string out;
    out.reserve(e - b);
    bool in_space = false;
    for (std::size_t i = b; i < e; ++i) {
        unsigned char c = static_cast<unsigned char>(raw[i]);
        if (std::isspace(c)) {
            in_space = true;
            continue;
        }
        if (in_space) {
            out.push_back('_');
            in_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

void validate_product_token(std::string_view token) {
    if (token.empty()) throw UsageError("product id must be non-empty");
    for (char c : token) {
        if (std::isspace(static_cast<unsigned char>(c)))
            throw UsageError("product id contains whitespace: '" + std::string(token) + "'");
    }
    if (is_si_token(token))
        throw UsageError("product id contains '=': '" + std::string(token) + "'");
}

std::vector<SideInfoToken> ProductRecord::si_tokens() const {
    std::vector<SideInfoToken> out;
    out.reserve(kSiKeyCount);
    for (int i = 0; i < kSiKeyCount; ++i) {
        if (si[i]) out.push_back(SideInfoToken{static_cast<SiKey>(i), *si[i]});
    }
    return out;
}

Catalog::Catalog(std::vector<ProductRecord> records) : records_(std::move(records)) {
    index_.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
        auto [it, fresh] = index_.emplace(records_[i].id, i);
        if (!fresh)
            throw IntegrityError("duplicate product id in catalog: " + records_[i].id);
    }
}

const ProductRecord& Catalog::record(std::string_view id) const {
    const ProductRecord* r = find(id);
    if (!r) throw NotFoundError("unknown product id: " + std::string(id));
    return *r;
}

const ProductRecord* Catalog::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return nullptr;
    return &records_[it->second];
}

std::optional<EventType> parse_event_type(std::string_view name) {
    for (int i = 0; i < 3; ++i) {
        if (name == kEventTypeNames[i]) return static_cast<EventType>(i);
    }
    return std::nullopt;
}

} // namespace embkit
