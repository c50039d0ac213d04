#pragma once

#include <json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "parlay_kelly/asymptotics.hpp"
#include "parlay_kelly/market.hpp"
#include "parlay_kelly/parlay_book.hpp"

namespace parlay_kelly::io {

using nlohmann::json;

/// Reads {"events":[{"name":..,"outcomes":[{"label":..,"prob":..,"price"|"odds":..}]}]}.
/// Schema problems and invalid values throw ValidationError.
MarketSet markets_from_json(const json& doc);
json markets_to_json(const MarketSet& markets);

/// Reads {"family":[{"baseline":[..],"direction":[..]}, ...]}.
PerturbationFamily family_from_json(const json& doc);

/// {"tickets":[{"legs":["H", null, ...],"stake":..,"price":..}]}, ordered by
/// descending stake then ticket order.
json book_to_json(const TicketBook& book, const MarketSet& markets);
TicketBook book_from_json(const json& doc, const MarketSet& markets);

/// One row per ticket: one column per event (label or "-"), then stake and price.
std::string book_to_csv(const TicketBook& book, const MarketSet& markets);

/// Tickets ordered by descending stake, ties in lexicographic ticket order.
std::vector<std::pair<Ticket, double>> sorted_by_stake(const TicketBook& book);

/// Human-readable leg list, e.g. "e1=H, e2=-".
std::string describe_ticket(const Ticket& t, const MarketSet& markets);

json read_json_file(const std::string& path);

/// printf-style fixed formatting ("%.<digits>f").
std::string fixed(double v, int digits);

}  // namespace parlay_kelly::io
