#include "parlay_kelly/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "parlay_kelly/errors.hpp"

namespace parlay_kelly::io {

namespace {

double number_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + ": missing \"" + key + "\"");
  if (!obj[key].is_number()) throw ValidationError(where + ": \"" + key + "\" must be a number");
  return obj[key].get<double>();
}

std::vector<double> number_array(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_array()) {
    throw ValidationError(where + ": \"" + key + "\" must be an array of numbers");
  }
  std::vector<double> out;
  for (const auto& v : obj[key]) {
    if (!v.is_number()) throw ValidationError(where + ": \"" + key + "\" must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

MarketSet markets_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("events") || !doc["events"].is_array()) {
    throw ValidationError("market file must be an object with an \"events\" array");
  }
  std::vector<Event> events;
  std::size_t index = 0;
  for (const auto& ev : doc["events"]) {
    ++index;
    const std::string where = "events[" + std::to_string(index - 1) + "]";
    if (!ev.is_object()) throw ValidationError(where + " must be an object");
    RawEvent raw;
    raw.name = ev.contains("name") && ev["name"].is_string() ? ev["name"].get<std::string>()
                                                             : "e" + std::to_string(index);
    if (!ev.contains("outcomes") || !ev["outcomes"].is_array()) {
      throw ValidationError(where + ": missing \"outcomes\" array");
    }
    for (const auto& o : ev["outcomes"]) {
      const std::string owhere = where + " outcome " + std::to_string(raw.outcomes.size());
      if (!o.is_object()) throw ValidationError(owhere + " must be an object");
      RawOutcome out;
      if (o.contains("label")) {
        if (!o["label"].is_string()) throw ValidationError(owhere + ": \"label\" must be a string");
        out.label = o["label"].get<std::string>();
      }
      out.prob = number_field(o, "prob", owhere);
      if (o.contains("price")) out.price = number_field(o, "price", owhere);
      if (o.contains("odds")) out.odds = number_field(o, "odds", owhere);
      raw.outcomes.push_back(std::move(out));
    }
    events.push_back(validate_event(raw));
  }
  return validate_markets(std::move(events));
}

json markets_to_json(const MarketSet& markets) {
  json events = json::array();
  for (const auto& e : markets.events) {
    json outcomes = json::array();
    for (std::size_t i = 0; i < e.size(); ++i) {
      outcomes.push_back({{"label", e.labels[i]}, {"prob", e.probs[i]}, {"price", e.prices[i]}});
    }
    events.push_back({{"name", e.name}, {"outcomes", std::move(outcomes)}});
  }
  return {{"events", std::move(events)}};
}

PerturbationFamily family_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("family") || !doc["family"].is_array()) {
    throw ValidationError("family file must be an object with a \"family\" array");
  }
  std::vector<std::pair<std::vector<double>, std::vector<double>>> entries;
  for (std::size_t j = 0; j < doc["family"].size(); ++j) {
    const auto& item = doc["family"][j];
    const std::string where = "family[" + std::to_string(j) + "]";
    if (!item.is_object()) throw ValidationError(where + " must be an object");
    entries.emplace_back(number_array(item, "baseline", where), number_array(item, "direction", where));
  }
  return build_family(entries);
}

std::vector<std::pair<Ticket, double>> sorted_by_stake(const TicketBook& book) {
  std::vector<std::pair<Ticket, double>> rows(book.stakes.begin(), book.stakes.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return rows;
}

std::string describe_ticket(const Ticket& t, const MarketSet& markets) {
  std::string s;
  for (std::size_t l = 0; l < t.legs.size(); ++l) {
    if (l) s += ", ";
    s += markets[l].name + "=" + (t.legs[l] == kOmit ? "-" : markets[l].labels[static_cast<std::size_t>(t.legs[l])]);
  }
  return s;
}

json book_to_json(const TicketBook& book, const MarketSet& markets) {
  json tickets = json::array();
  for (const auto& [ticket, stake] : sorted_by_stake(book)) {
    json legs = json::array();
    for (std::size_t l = 0; l < ticket.legs.size(); ++l) {
      if (ticket.legs[l] == kOmit) {
        legs.push_back(nullptr);
      } else {
        legs.push_back(markets[l].labels[static_cast<std::size_t>(ticket.legs[l])]);
      }
    }
    tickets.push_back({{"legs", std::move(legs)}, {"stake", stake}, {"price", ticket_price(ticket, markets)}});
  }
  return {{"tickets", std::move(tickets)}};
}

TicketBook book_from_json(const json& doc, const MarketSet& markets) {
  if (!doc.is_object() || !doc.contains("tickets") || !doc["tickets"].is_array()) {
    throw ValidationError("book file must be an object with a \"tickets\" array");
  }
  TicketBook book;
  for (std::size_t k = 0; k < doc["tickets"].size(); ++k) {
    const auto& item = doc["tickets"][k];
    const std::string where = "tickets[" + std::to_string(k) + "]";
    if (!item.is_object() || !item.contains("legs") || !item["legs"].is_array()) {
      throw ValidationError(where + ": missing \"legs\" array");
    }
    const auto& legs = item["legs"];
    if (legs.size() != markets.size()) {
      throw ValidationError(where + ": expected " + std::to_string(markets.size()) + " legs");
    }
    Ticket t;
    for (std::size_t l = 0; l < legs.size(); ++l) {
      if (legs[l].is_null()) {
        t.legs.push_back(kOmit);
        continue;
      }
      if (!legs[l].is_string()) throw ValidationError(where + ": legs must be labels or null");
      const auto& labels = markets[l].labels;
      const auto it = std::find(labels.begin(), labels.end(), legs[l].get<std::string>());
      if (it == labels.end()) {
        throw ValidationError(where + ": unknown label '" + legs[l].get<std::string>() + "' for event '" +
                              markets[l].name + "'");
      }
      t.legs.push_back(static_cast<int>(it - labels.begin()));
    }
    const double stake = number_field(item, "stake", where);
    if (!(stake >= 0.0)) throw ValidationError(where + ": stake must be nonnegative");
    if (!book.stakes.emplace(t, stake).second) throw ValidationError(where + ": duplicate ticket");
  }
  return book;
}

std::string book_to_csv(const TicketBook& book, const MarketSet& markets) {
  std::ostringstream out;
  for (const auto& e : markets.events) out << e.name << ',';
  out << "stake,price\n";
  for (const auto& [ticket, stake] : sorted_by_stake(book)) {
    for (std::size_t l = 0; l < ticket.legs.size(); ++l) {
      out << (ticket.legs[l] == kOmit ? std::string("-") : markets[l].labels[static_cast<std::size_t>(ticket.legs[l])])
          << ',';
    }
    out << g17(stake) << ',' << g17(ticket_price(ticket, markets)) << '\n';
  }
  return out.str();
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace parlay_kelly::io
