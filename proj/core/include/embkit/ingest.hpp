#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "embkit/types.hpp"

namespace embkit::ingest {

/// Reads a whole file into lines. Gzip-compressed input is detected by the
/// 1f 8b magic bytes and inflated transparently.
std::vector<std::string> read_lines(const std::string& path);

/// What to do with a rejected line.
enum class ErrorPolicy { abort_on_error, skip_and_count };

struct CatalogParseOptions {
    ErrorPolicy policy = ErrorPolicy::abort_on_error;
};

struct CatalogParseResult {
    std::vector<ProductRecord> records;
    std::size_t skipped_lines = 0;
};

/// One JSON object per line with "product_id" and any of the six SI keys.
/// SI values are canonicalized (lower-cased, trimmed, whitespace -> '_');
/// missing keys stay absent. Duplicate ids and malformed JSON are rejected
/// with their line number; the policy chooses abort vs skip-and-count.
CatalogParseResult parse_catalog(const std::vector<std::string>& lines,
                                 const CatalogParseOptions& opts = {});

CatalogParseResult parse_catalog_file(const std::string& path,
                                      const CatalogParseOptions& opts = {});

struct EventParseOptions {
    ErrorPolicy policy = ErrorPolicy::abort_on_error;
    /// When true, events whose product is absent from the catalog are dropped
    /// (counted); default keeps them, flagged via uncataloged_count.
    bool strict_catalog = false;
    /// Catalog for the strict/flagging check; may be null (no check).
    const Catalog* catalog = nullptr;
};

struct EventParseResult {
    std::vector<Event> events;
    std::size_t skipped_lines = 0;
    std::size_t uncataloged_count = 0;
};

/// JSONL with fields user_id, product_id, event_type, session_id, ts and an
/// optional "returned" boolean on purchases. Events come back in file order;
/// ordering is the list builders' job.
EventParseResult parse_events(const std::vector<std::string>& lines,
                              const EventParseOptions& opts = {});

EventParseResult parse_events_file(const std::string& path, const EventParseOptions& opts = {});

/// Per user: bag and purchase events sorted by timestamp (stable on ties),
/// keeping users with at least `min_purchases` distinct purchased products.
/// Repeat purchases of one product stay as repeats. Lists come back in
/// first-appearance order of their user.
std::vector<LifetimeList> build_lifetime_lists(const std::vector<Event>& events,
                                               int min_purchases = 3);

/// Distinct purchased products per user; the eligibility count behind the
/// lifetime-list filter, reused by evaluators.
std::size_t distinct_purchases(const std::vector<Event>& user_events);

/// Groups events by session_id (first-appearance order), each session
/// timestamp-sorted (stable). A session spanning two users is an integrity
/// error. Every event lands in exactly one session.
std::vector<Session> build_sessions(const std::vector<Event>& events);

} // namespace embkit::ingest
