#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "epec/capacity_auction.hpp"
#include "epec/error.hpp"

using namespace epec;

namespace {

// Welfare maximization over a grid of cleared quantities. For each grid
// quantity the best demand value comes from taking grid steps greedily from
// the segment with the highest marginal value (segments are concave), and
// the cheapest supply from filling offers in order of price per derated MW.
double brute_force_welfare(const std::vector<DemandSegment>& segs, const std::vector<CapacityOffer>& offers,
                           double step) {
  double supply_total = 0.0;
  std::vector<std::pair<double, double>> supply;  // (price per derated MW, derated MW)
  for (const auto& o : offers) {
    if (o.derate <= 0.0) continue;
    supply.emplace_back(o.bid / o.derate, o.derate * o.pmax);
    supply_total += o.derate * o.pmax;
  }
  std::sort(supply.begin(), supply.end());
  double demand_total = 0.0;
  for (const auto& s : segs) demand_total += s.max_quantity;
  const double qmax = std::min(supply_total, demand_total);

  std::vector<double> taken(segs.size(), 0.0);
  double value = 0.0;
  double best = 0.0;
  std::size_t next_offer = 0;
  double used_in_offer = 0.0, cost = 0.0;
  for (double q = 0.0; qmax - q > 1e-12;) {
    std::size_t pick = segs.size();
    double mv = -1e300;
    for (std::size_t c = 0; c < segs.size(); ++c) {
      if (segs[c].max_quantity - taken[c] <= 1e-12) continue;
      const double m = segs[c].price_intercept + segs[c].slope * taken[c];
      if (m > mv) {
        mv = m;
        pick = c;
      }
    }
    if (pick == segs.size()) break;
    const auto& s = segs[pick];
    const double h = std::min({step, qmax - q, s.max_quantity - taken[pick]});
    value += s.price_intercept * h + 0.5 * s.slope * ((taken[pick] + h) * (taken[pick] + h) - taken[pick] * taken[pick]);
    taken[pick] += h;

    double need = h;
    while (need > 1e-12 && next_offer < supply.size()) {
      const double room = supply[next_offer].second - used_in_offer;
      const double take = std::min(room, need);
      cost += take * supply[next_offer].first;
      used_in_offer += take;
      need -= take;
      if (used_in_offer >= supply[next_offer].second - 1e-12) {
        ++next_offer;
        used_in_offer = 0.0;
      }
    }
    q += h;
    best = std::max(best, value - cost);
  }
  return best;
}

void expect_balanced(const std::vector<CapacityOffer>& offers, const AuctionResult& r) {
  double supplied = 0.0;
  for (std::size_t u = 0; u < offers.size(); ++u) {
    EXPECT_GE(r.cleared_fraction[u], 0.0);
    EXPECT_LE(r.cleared_fraction[u], 1.0);
    supplied += r.cleared_fraction[u] * offers[u].derate * offers[u].pmax;
  }
  EXPECT_NEAR(supplied, r.cleared_quantity(), 1e-9 * std::max(1.0, supplied));
}

}  // namespace

TEST(ClearAuction, SlopedSegmentMeetsSingleOffer) {
  const std::vector<DemandSegment> segs{{100.0, -0.02, 10000.0}};
  const std::vector<CapacityOffer> offers{{20.0, 10000.0, 1.0}};
  const AuctionResult r = clear_auction(segs, offers);
  EXPECT_NEAR(r.cleared_demand[0], 4000.0, 1e-9);
  EXPECT_NEAR(r.cleared_fraction[0], 0.4, 1e-12);
  EXPECT_NEAR(r.clearing_price, 20.0, 1e-12);
  // 100 d - 0.01 d^2 - 20 d at d = 4000
  EXPECT_NEAR(r.welfare, 160000.0, 1e-6);
}

TEST(ClearAuction, NoOffersClearsNothing) {
  const std::vector<DemandSegment> segs{{80.0, -1.0, 10.0}, {120.0, 0.0, 5.0}};
  const AuctionResult r = clear_auction(segs, {});
  EXPECT_EQ(r.cleared_demand, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(r.clearing_price, 120.0);
  EXPECT_EQ(r.welfare, 0.0);
}

TEST(ClearAuction, FlatSegmentDeratedOffer) {
  const std::vector<DemandSegment> segs{{10.0, 0.0, 50.0}};
  const std::vector<CapacityOffer> offers{{0.0, 100.0, 0.5}};
  const AuctionResult r = clear_auction(segs, offers);
  EXPECT_EQ(r.cleared_demand[0], 50.0);
  EXPECT_EQ(r.cleared_fraction[0], 1.0);
  EXPECT_EQ(r.clearing_price, 10.0);
  EXPECT_EQ(r.welfare, 500.0);
  EXPECT_NEAR(brute_force_welfare(segs, offers, 1.0), 500.0, 1e-9);
}

TEST(ClearAuction, ZeroDerateNeverClears) {
  const std::vector<DemandSegment> segs{{50.0, 0.0, 10.0}};
  const std::vector<CapacityOffer> offers{{0.0, 100.0, 0.0}, {5.0, 4.0, 1.0}};
  const AuctionResult r = clear_auction(segs, offers);
  EXPECT_EQ(r.cleared_fraction[0], 0.0);
  EXPECT_EQ(r.cleared_fraction[1], 1.0);
  EXPECT_EQ(r.cleared_quantity(), 4.0);
}

TEST(ClearAuction, RejectsInvalidInput) {
  const std::vector<CapacityOffer> ok{{1.0, 1.0, 1.0}};
  EXPECT_THROW(clear_auction({}, ok), ValidationError);
  const std::vector<DemandSegment> up{{10.0, 0.5, 1.0}};
  EXPECT_THROW(clear_auction(up, ok), ValidationError);
  const std::vector<DemandSegment> seg{{10.0, -0.5, 1.0}};
  const std::vector<CapacityOffer> bad_derate{{1.0, 1.0, 1.5}};
  EXPECT_THROW(clear_auction(seg, bad_derate), ValidationError);
  const std::vector<CapacityOffer> bad_bid{{-1.0, 1.0, 1.0}};
  EXPECT_THROW(clear_auction(seg, bad_bid), ValidationError);
}

TEST(ClearAuction, GridOracleAndComplementarySlackness) {
  std::mt19937_64 rng(31337);
  // Widths and derated quantities on the 0.01 grid, so every supply kink is a grid point.
  std::uniform_int_distribution<int> nseg(1, 3), noff(1, 4), coin(0, 3), d(1, 60), pmax(1, 60), quarter(1, 4);
  std::uniform_real_distribution<double> a(10.0, 100.0), m(-2.0, 0.0), bid(0.0, 90.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DemandSegment> segs(nseg(rng));
    for (auto& s : segs) s = {a(rng), coin(rng) == 0 ? 0.0 : m(rng), static_cast<double>(d(rng))};
    std::vector<CapacityOffer> offers(noff(rng));
    for (auto& o : offers) o = {bid(rng), static_cast<double>(pmax(rng)), coin(rng) == 0 ? 1.0 : 0.25 * quarter(rng)};

    const AuctionResult r = clear_auction(segs, offers);
    const double bf = brute_force_welfare(segs, offers, 0.01);
    EXPECT_NEAR(r.welfare, bf, 1e-4 * std::max(1.0, std::abs(bf))) << "trial " << trial;
    EXPECT_NEAR(r.welfare, auction_welfare(segs, offers, r.cleared_demand, r.cleared_fraction), 1e-9);
    expect_balanced(offers, r);

    // Supply side, judged per derated MW.
    for (std::size_t u = 0; u < offers.size(); ++u) {
      const double eff = offers[u].bid / offers[u].derate;
      if (eff < r.clearing_price) {
        EXPECT_EQ(r.cleared_fraction[u], 1.0) << "trial " << trial << " offer " << u;
      }
      if (eff > r.clearing_price) {
        EXPECT_EQ(r.cleared_fraction[u], 0.0) << "trial " << trial << " offer " << u;
      }
    }
    // Demand side: segments valued above the price clear, below it do not.
    for (std::size_t c = 0; c < segs.size(); ++c) {
      const double mv = segs[c].price_intercept + segs[c].slope * r.cleared_demand[c];
      EXPECT_GE(r.cleared_demand[c], 0.0);
      EXPECT_LE(r.cleared_demand[c], segs[c].max_quantity);
      if (r.cleared_demand[c] < segs[c].max_quantity - 1e-9) {
        EXPECT_LE(mv, r.clearing_price + 1e-9);
      }
      if (r.cleared_demand[c] > 1e-9) {
        EXPECT_GE(mv, r.clearing_price - 1e-9);
      }
    }
  }
}

TEST(ClearAuction, ComplementarySlacknessUnitDerate) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> a(20.0, 100.0), m(-1.0, -0.01), d(10.0, 200.0), bid(0.0, 90.0),
      pmax(1.0, 80.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<DemandSegment> segs{{a(rng), m(rng), d(rng)}, {a(rng), m(rng), d(rng)}};
    std::vector<CapacityOffer> offers{{bid(rng), pmax(rng), 1.0}, {bid(rng), pmax(rng), 1.0}, {bid(rng), pmax(rng), 1.0}};
    const AuctionResult r = clear_auction(segs, offers);
    for (std::size_t u = 0; u < offers.size(); ++u) {
      if (offers[u].bid < r.clearing_price) {
        EXPECT_EQ(r.cleared_fraction[u], 1.0);
      }
      if (offers[u].bid > r.clearing_price) {
        EXPECT_EQ(r.cleared_fraction[u], 0.0);
      }
    }
  }
}

TEST(ClearAuction, PriceScaling) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> a(20.0, 100.0), m(-1.0, 0.0), d(10.0, 200.0), bid(0.0, 90.0),
      pmax(1.0, 80.0), der(0.3, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DemandSegment> segs{{a(rng), m(rng), d(rng)}, {a(rng), m(rng), d(rng)}};
    std::vector<CapacityOffer> offers{{bid(rng), pmax(rng), der(rng)}, {bid(rng), pmax(rng), der(rng)}};
    const double s = 4.0;  // exact in binary, so scaled breakpoints stay exact
    auto segs2 = segs;
    auto offers2 = offers;
    for (auto& x : segs2) {
      x.price_intercept *= s;
      x.slope *= s;
    }
    for (auto& o : offers2) o.bid *= s;
    const AuctionResult r1 = clear_auction(segs, offers), r2 = clear_auction(segs2, offers2);
    EXPECT_NEAR(r2.clearing_price, s * r1.clearing_price, 1e-9 * std::max(1.0, r2.clearing_price));
    for (std::size_t c = 0; c < segs.size(); ++c) EXPECT_NEAR(r2.cleared_demand[c], r1.cleared_demand[c], 1e-9);
    for (std::size_t u = 0; u < offers.size(); ++u)
      EXPECT_NEAR(r2.cleared_fraction[u], r1.cleared_fraction[u], 1e-12);
  }
}

TEST(AuctionCsv, RoundTripAndErrors) {
  std::istringstream segs_in("price_intercept,slope,max_quantity\n100,-0.02,10000\n");
  std::istringstream offers_in("bid,pmax,derate\n20,10000,1\n");
  const auto segs = read_segments_csv(segs_in);
  const auto offers = read_offers_csv(offers_in);
  ASSERT_EQ(segs.size(), 1u);
  ASSERT_EQ(offers.size(), 1u);
  std::ostringstream out;
  write_auction_csv(out, clear_auction(segs, offers));
  EXPECT_NE(out.str().find("clearing_price,,20\n"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("cleared_quantity,,4000\n"), std::string::npos) << out.str();

  std::istringstream bad_header("bid,pmax\n1,2\n");
  EXPECT_THROW(read_offers_csv(bad_header), SchemaError);
  std::istringstream empty("");
  EXPECT_THROW(read_segments_csv(empty), SchemaError);
  std::istringstream bad_number("bid,pmax,derate\n1,x,1\n");
  EXPECT_THROW(read_offers_csv(bad_number), ParseError);
}
