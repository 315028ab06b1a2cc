#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "nta/mat.hpp"
#include "nta/traffic.hpp"

namespace nta {

// Link CSV (`t,link_id,bytes`, header required) -> TrafficMatrix. Rows are the
// sorted distinct timestamps, columns the link ids in sorted order.
TrafficMatrix parse_link_csv(std::istream& in);
void write_link_csv(std::ostream& out, const TrafficMatrix& tm);

// Routing-matrix file: first line `m n`, then m rows of n reals.
Mat parse_routing_matrix(std::istream& in);
void write_routing_matrix(std::ostream& out, const Mat& a);

// Shortest representation that round-trips the double (used everywhere we
// print numbers, so identical runs give identical bytes).
std::string format_double(double v);

}  // namespace nta
