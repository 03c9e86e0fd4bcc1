#include "epec/capacity_auction.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "epec/error.hpp"
#include "epec/format.hpp"

namespace epec {

double AuctionResult::cleared_quantity() const {
  return std::accumulate(cleared_demand.begin(), cleared_demand.end(), 0.0);
}

double auction_welfare(std::span<const DemandSegment> segments, std::span<const CapacityOffer> offers,
                       std::span<const double> cleared_demand, std::span<const double> cleared_fraction) {
  double w = 0.0;
  for (std::size_t c = 0; c < segments.size(); ++c) {
    const double d = cleared_demand[c];
    w += segments[c].price_intercept * d + 0.5 * segments[c].slope * d * d;
  }
  for (std::size_t u = 0; u < offers.size(); ++u) w -= offers[u].bid * cleared_fraction[u] * offers[u].pmax;
  return w;
}

namespace {

void validate(std::span<const DemandSegment> segments, std::span<const CapacityOffer> offers) {
  if (segments.empty()) throw ValidationError("clear_auction: need at least one demand segment");
  for (std::size_t c = 0; c < segments.size(); ++c) {
    const auto& s = segments[c];
    if (!std::isfinite(s.price_intercept)) throw ValidationError("clear_auction: segment intercept must be finite");
    if (!(s.slope <= 0.0) || !std::isfinite(s.slope))
      throw ValidationError("clear_auction: segment " + std::to_string(c) + " slope must be <= 0");
    if (!(s.max_quantity >= 0.0) || !std::isfinite(s.max_quantity))
      throw ValidationError("clear_auction: segment " + std::to_string(c) + " max_quantity must be >= 0");
  }
  for (std::size_t u = 0; u < offers.size(); ++u) {
    const auto& o = offers[u];
    if (!(o.bid >= 0.0) || !std::isfinite(o.bid))
      throw ValidationError("clear_auction: offer " + std::to_string(u) + " bid must be >= 0");
    if (!(o.pmax > 0.0) || !std::isfinite(o.pmax))
      throw ValidationError("clear_auction: offer " + std::to_string(u) + " pmax must be > 0");
    if (!(o.derate >= 0.0 && o.derate <= 1.0))
      throw ValidationError("clear_auction: offer " + std::to_string(u) + " derate must be in [0, 1]");
  }
}

struct Curves {
  std::span<const DemandSegment> segments;
  std::vector<double> supply_price;  // per derated MW; +inf for zero derate
  std::vector<double> supply_qty;    // derated MW

  // Demand of one segment at price p. `upper` picks the full width of a
  // flat segment priced exactly at p.
  static double segment_demand(const DemandSegment& s, double p, bool upper) {
    if (s.max_quantity <= 0.0) return 0.0;
    if (s.slope == 0.0) {
      if (p < s.price_intercept) return s.max_quantity;
      if (p > s.price_intercept) return 0.0;
      return upper ? s.max_quantity : 0.0;
    }
    return std::clamp((p - s.price_intercept) / s.slope, 0.0, s.max_quantity);
  }

  double demand(double p, bool upper) const {
    double d = 0.0;
    for (const auto& s : segments) d += segment_demand(s, p, upper);
    return d;
  }

  // Derated supply offered strictly below p (upper = false) or at or below p.
  double supply(double p, bool upper) const {
    double q = 0.0;
    for (std::size_t u = 0; u < supply_price.size(); ++u) {
      if (supply_price[u] < p || (upper && supply_price[u] == p)) q += supply_qty[u];
    }
    return q;
  }

  double excess(double p) const { return demand(p, true) - supply(p, false); }
};

}  // namespace

AuctionResult clear_auction(std::span<const DemandSegment> segments, std::span<const CapacityOffer> offers) {
  validate(segments, offers);

  Curves cv{segments, {}, {}};
  for (const auto& o : offers) {
    cv.supply_price.push_back(o.derate > 0.0 ? o.bid / o.derate : std::numeric_limits<double>::infinity());
    cv.supply_qty.push_back(o.derate * o.pmax);
  }

  // Highest marginal value anyone places on capacity.
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& s : segments)
    if (s.max_quantity > 0.0) top = std::max(top, s.price_intercept);
  if (!std::isfinite(top)) {
    for (const auto& s : segments) top = std::max(top, s.price_intercept);
  }

  std::vector<double> breaks{top, std::min(0.0, top)};
  for (const auto& s : segments) {
    breaks.push_back(s.price_intercept);
    breaks.push_back(s.price_intercept + s.slope * s.max_quantity);
  }
  for (double b : cv.supply_price)
    if (std::isfinite(b)) breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  breaks.erase(std::upper_bound(breaks.begin(), breaks.end(), top), breaks.end());

  // excess(p) = demand_hi(p) - supply_lo(p) is non-increasing and
  // left-continuous, so {p : excess(p) >= 0} is a closed-right ray. Its
  // right end is the clearing price.
  std::size_t k = 0;
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    if (cv.excess(breaks[i]) >= 0.0) k = i;
  }
  double price = breaks[k];
  if (k + 1 < breaks.size()) {
    // Between breakpoints demand is affine and supply constant.
    const double lo = breaks[k], hi = breaks[k + 1];
    const double mid = 0.5 * (lo + hi);
    double slope = 0.0;
    for (const auto& s : segments) {
      if (s.slope < 0.0 && s.max_quantity > 0.0 && s.price_intercept + s.slope * s.max_quantity <= lo &&
          s.price_intercept >= hi)
        slope += 1.0 / s.slope;
    }
    const double h = cv.excess(mid);
    if (slope < 0.0) {
      const double root = mid - h / slope;
      if (root > lo) price = std::min(root, hi);
    }
  }

  const double quantity = std::min(cv.demand(price, true), cv.supply(price, true));

  AuctionResult res;
  res.clearing_price = price;

  // Demand side: value above the price clears in full, flat segments priced
  // exactly at the price take the rest in declaration order.
  res.cleared_demand.resize(segments.size());
  double assigned = 0.0;
  for (std::size_t c = 0; c < segments.size(); ++c) {
    res.cleared_demand[c] = Curves::segment_demand(segments[c], price, false);
    assigned += res.cleared_demand[c];
  }
  for (std::size_t c = 0; c < segments.size() && assigned < quantity; ++c) {
    const auto& s = segments[c];
    if (s.slope == 0.0 && s.price_intercept == price) {
      const double add = std::min(s.max_quantity - res.cleared_demand[c], quantity - assigned);
      res.cleared_demand[c] += add;
      assigned += add;
    }
  }
  // Rounding in the affine solve can leave a sub-ulp gap; absorb it in the
  // last segment with room.
  if (assigned != quantity) {
    for (std::size_t c = segments.size(); c-- > 0;) {
      const double target = res.cleared_demand[c] + (quantity - assigned);
      if (target >= 0.0 && target <= segments[c].max_quantity && res.cleared_demand[c] > 0.0) {
        res.cleared_demand[c] = target;
        break;
      }
    }
  }

  // Supply side: fill in ascending price per derated MW, ties by declaration.
  std::vector<std::size_t> order(offers.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cv.supply_price[a] < cv.supply_price[b]; });
  res.cleared_fraction.assign(offers.size(), 0.0);
  // Leftovers within a relative 1e-12 of an offer boundary are rounding and
  // snap to it, so offers are either whole or untouched there.
  const double dust = 1e-12 * std::max(1.0, quantity);
  double remaining = quantity;
  for (std::size_t u : order) {
    if (remaining <= dust || !std::isfinite(cv.supply_price[u])) break;
    if (cv.supply_qty[u] <= remaining + dust) {
      res.cleared_fraction[u] = 1.0;
      remaining -= cv.supply_qty[u];
    } else {
      res.cleared_fraction[u] = remaining / cv.supply_qty[u];
      remaining = 0.0;
    }
  }

  res.welfare = auction_welfare(segments, offers, res.cleared_demand, res.cleared_fraction);
  return res;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::vector<double>> read_table(std::istream& in, const std::vector<std::string>& header,
                                            const char* what) {
  auto rows = read_csv(in);
  if (rows.empty()) throw SchemaError(std::string(what) + " CSV is empty");
  if (rows.front() != header) {
    std::string expected;
    for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
    throw SchemaError(std::string(what) + " CSV header must be '" + expected + "'");
  }
  std::vector<std::vector<double>> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != header.size())
      throw SchemaError(std::string(what) + " CSV row " + std::to_string(i + 1) + " has " +
                        std::to_string(rows[i].size()) + " fields, expected " + std::to_string(header.size()));
    std::vector<double> vals;
    for (std::size_t k = 0; k < header.size(); ++k)
      vals.push_back(parse_double(rows[i][k], std::string(what) + " row " + std::to_string(i + 1) + " " + header[k]));
    out.push_back(std::move(vals));
  }
  return out;
}

}  // namespace

std::vector<DemandSegment> read_segments_csv(std::istream& in) {
  std::vector<DemandSegment> out;
  for (const auto& r : read_table(in, {"price_intercept", "slope", "max_quantity"}, "segments"))
    out.push_back(DemandSegment{r[0], r[1], r[2]});
  return out;
}

std::vector<CapacityOffer> read_offers_csv(std::istream& in) {
  std::vector<CapacityOffer> out;
  for (const auto& r : read_table(in, {"bid", "pmax", "derate"}, "offers"))
    out.push_back(CapacityOffer{r[0], r[1], r[2]});
  return out;
}

void write_auction_csv(std::ostream& out, const AuctionResult& result) {
  out << "item,index,value\n";
  out << "clearing_price,," << fmt_double(result.clearing_price) << '\n';
  out << "cleared_quantity,," << fmt_double(result.cleared_quantity()) << '\n';
  out << "welfare,," << fmt_double(result.welfare) << '\n';
  for (std::size_t c = 0; c < result.cleared_demand.size(); ++c)
    out << "segment," << c + 1 << ',' << fmt_double(result.cleared_demand[c]) << '\n';
  for (std::size_t u = 0; u < result.cleared_fraction.size(); ++u)
    out << "offer," << u + 1 << ',' << fmt_double(result.cleared_fraction[u]) << '\n';
}

}  // namespace epec
