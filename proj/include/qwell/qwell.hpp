#pragma once

// Market potential estimation and infinite-well forecasting, end to end:
// EOD data -> decay-weighted held shares -> potential -> eigenstates ->
// price probability densities and barrier/breakout/tunneling analysis.

#include "qwell/analysis.hpp"
#include "qwell/decay.hpp"
#include "qwell/error.hpp"
#include "qwell/grid.hpp"
#include "qwell/io.hpp"
#include "qwell/market_data.hpp"
#include "qwell/potential.hpp"
#include "qwell/solver.hpp"
#include "qwell/synthetic.hpp"
