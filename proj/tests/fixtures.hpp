#pragma once

#include <initializer_list>

#include "listpolar/dgp.hpp"

namespace fixtures {

struct Row {
  int treat;
  int y;
  int d;
  int x1 = 0;
  double x2 = 0.0;
  double x3 = 0.0;
};

// Dataset from explicit rows; latent z is unknown.
inline listpolar::Dataset make_dataset(std::initializer_list<Row> rows, int j_items = 4) {
  listpolar::Dataset ds;
  ds.config.j_items = j_items;
  ds.has_truth = false;
  std::size_t id = 0;
  for (const Row& r : rows) {
    listpolar::Respondent p;
    p.id = id++;
    p.treat = r.treat;
    p.y = r.y;
    p.d = r.d;
    p.x1 = r.x1;
    p.x2 = r.x2;
    p.x3 = r.x3;
    ds.respondents.push_back(p);
  }
  ds.config.n_total = static_cast<int>(ds.size());
  return ds;
}

}  // namespace fixtures
