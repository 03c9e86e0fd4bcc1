#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace epec {

/// One piece of the administratively set capacity demand curve. Marginal
/// value of the d-th MW in this segment is price_intercept + slope * d.
struct DemandSegment {
  double price_intercept = 0.0;  // money/MW
  double slope = 0.0;            // money/MW^2, <= 0
  double max_quantity = 0.0;     // MW
};

struct CapacityOffer {
  double bid = 0.0;     // money per nameplate MW
  double pmax = 0.0;    // nameplate MW
  double derate = 1.0;  // fraction of pmax credited
};

struct AuctionResult {
  std::vector<double> cleared_demand;    // MW per segment
  std::vector<double> cleared_fraction;  // per offer, in [0, 1]
  double clearing_price = 0.0;           // money per derated MW
  double welfare = 0.0;

  double cleared_quantity() const;
};

/// Welfare of a given allocation: demand value minus supply cost.
double auction_welfare(std::span<const DemandSegment> segments, std::span<const CapacityOffer> offers,
                       std::span<const double> cleared_demand, std::span<const double> cleared_fraction);

/// Welfare-maximizing clearing of sloped demand segments against derated
/// offers, balancing cleared derated supply with cleared demand.
///
/// The problem is one-dimensional once the balance row is eliminated, so it
/// is solved by intersecting the aggregate demand and supply curves over
/// their sorted price breakpoints. An offer's supply price per derated MW is
/// bid / derate; offers with zero derate never clear.
///
/// clearing_price is the upper end of the dual interval of the balance row,
/// i.e. the marginal demand value at the cleared quantity unless a partially
/// cleared offer pins it lower. With nothing cleared it is the highest
/// segment intercept.
AuctionResult clear_auction(std::span<const DemandSegment> segments, std::span<const CapacityOffer> offers);

/// CSV readers/writer for the `auction` subcommand.
/// segments: price_intercept,slope,max_quantity
/// offers:   bid,pmax,derate
std::vector<DemandSegment> read_segments_csv(std::istream& in);
std::vector<CapacityOffer> read_offers_csv(std::istream& in);
void write_auction_csv(std::ostream& out, const AuctionResult& result);

}  // namespace epec
