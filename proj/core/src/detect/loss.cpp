// Copyright 2026 The Litchi Authors
// SPDX-License-Identifier: Apache-2.0

#include "litchi/detect/loss.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "litchi/error.hpp"

namespace litchi::detect {

using nn::Tensor;
using nn::Var;

namespace {

template <typename T>
Var<T> column(const Tensor<T>& t, int64_t k) {
  const int64_t p = t.dim(0);
  Tensor<T> out({p, 1});
  for (int64_t i = 0; i < p; ++i) out[i] = t[i * t.dim(1) + k];
  return Var<T>(std::move(out));
}

template <typename T>
Var<T> col(const Var<T>& x, int64_t k) {
  return nn::slice(x, 1, k, 1);
}

template <typename T>
void require_finite(const LossBreakdown<T>& loss) {
  if (std::isfinite(loss.total_value())) return;
  std::ostringstream msg;
  msg << "non-finite loss: box=" << loss.box_value() << " cls=" << loss.cls_value()
      << " positives=" << loss.positives;
  throw NumericError(msg.str());
}

}  // namespace

template <typename T>
Var<T> ciou_loss(const Var<T>& px1, const Var<T>& py1, const Var<T>& px2, const Var<T>& py2, const Tensor<T>& target) {
  const T eps = static_cast<T>(1e-7);
  const Var<T> tx1 = column(target, 0), ty1 = column(target, 1), tx2 = column(target, 2), ty2 = column(target, 3);
  const Var<T> iw = nn::relu(nn::sub(nn::minimum(px2, tx2), nn::maximum(px1, tx1)));
  const Var<T> ih = nn::relu(nn::sub(nn::minimum(py2, ty2), nn::maximum(py1, ty1)));
  const Var<T> inter = nn::mul(iw, ih);
  const Var<T> pw = nn::sub(px2, px1), ph = nn::sub(py2, py1);
  const Var<T> tw = nn::sub(tx2, tx1), th = nn::sub(ty2, ty1);
  const Var<T> uni = nn::add_scalar(nn::sub(nn::add(nn::mul(pw, ph), nn::mul(tw, th)), inter), eps);
  const Var<T> overlap = nn::div(inter, uni);
  const Var<T> cw = nn::sub(nn::maximum(px2, tx2), nn::minimum(px1, tx1));
  const Var<T> ch = nn::sub(nn::maximum(py2, ty2), nn::minimum(py1, ty1));
  const Var<T> c2 = nn::add_scalar(nn::add(nn::square(cw), nn::square(ch)), eps);
  const Var<T> dx = nn::sub(nn::add(px1, px2), nn::add(tx1, tx2));
  const Var<T> dy = nn::sub(nn::add(py1, py2), nn::add(ty1, ty2));
  const Var<T> rho2 = nn::mul_scalar(nn::add(nn::square(dx), nn::square(dy)), T(0.25));
  const Var<T> dv = nn::sub(nn::atan(nn::div(tw, nn::add_scalar(th, eps))), nn::atan(nn::div(pw, nn::add_scalar(ph, eps))));
  const Var<T> v = nn::mul_scalar(nn::square(dv), static_cast<T>(4.0 / (std::numbers::pi * std::numbers::pi)));
  // The trade-off weight is treated as a constant.
  Var<T> alpha;
  {
    nn::NoGradGuard guard;
    alpha = nn::div(v, nn::add_scalar(nn::sub(v, overlap), 1 + eps)).detach();
  }
  const Var<T> value = nn::sub(overlap, nn::add(nn::div(rho2, c2), nn::mul(v, alpha)));
  return nn::add_scalar(nn::neg(value), T(1));
}

template <typename T>
LossBreakdown<T> compute_loss(const std::vector<nn::HeadOutput<T>>& outputs, const AssignResult& targets,
                              const std::vector<int>& strides, const LossWeights& weights) {
  if (outputs.size() != strides.size()) {
    throw ShapeError("loss got " + std::to_string(outputs.size()) + " scales for " + std::to_string(strides.size()) +
                     " strides");
  }
  LossBreakdown<T> loss;
  loss.positives = targets.positives.size();
  const T norm = static_cast<T>(1.0 / std::max<double>(1.0, static_cast<double>(loss.positives)));
  Var<T> box_sum, cls_sum;
  for (size_t level = 0; level < outputs.size(); ++level) {
    const auto& out = outputs[level];
    const int stride = strides[level];
    Tensor<T> onehot(out.cls.shape());
    std::vector<nn::CellRef> cells;
    std::vector<const Assignment*> rows;
    for (const auto& a : targets.positives) {
      if (a.level != static_cast<int>(level)) continue;
      if (a.class_id < 0 || a.class_id >= out.cls.dim(1)) throw DomainError("class_id", "outside head classes");
      onehot.at(static_cast<int64_t>(a.image), a.class_id, a.gy, a.gx) = T(1);
      cells.push_back({static_cast<int64_t>(a.image), a.gy, a.gx});
      rows.push_back(&a);
    }
    const Var<T> cls_term = nn::bce_with_logits_sum(out.cls, onehot);
    cls_sum = cls_sum.defined() ? nn::add(cls_sum, cls_term) : cls_term;
    if (cells.empty()) continue;
    const int64_t p = static_cast<int64_t>(cells.size());
    Tensor<T> centre_x({p, 1}), centre_y({p, 1}), target({p, 4});
    for (int64_t i = 0; i < p; ++i) {
      const Assignment& a = *rows[static_cast<size_t>(i)];
      centre_x[i] = static_cast<T>((static_cast<double>(a.gx) + 0.5) * stride);
      centre_y[i] = static_cast<T>((static_cast<double>(a.gy) + 0.5) * stride);
      target[i * 4 + 0] = static_cast<T>(a.box.x1);
      target[i * 4 + 1] = static_cast<T>(a.box.y1);
      target[i * 4 + 2] = static_cast<T>(a.box.x2);
      target[i * 4 + 3] = static_cast<T>(a.box.y2);
    }
    const Var<T> dist = nn::mul_scalar(nn::softplus(nn::gather_cells(out.box, cells)), static_cast<T>(stride));
    const Var<T> cx(std::move(centre_x)), cy(std::move(centre_y));
    const Var<T> term = nn::sum(ciou_loss(nn::sub(cx, col(dist, 0)), nn::sub(cy, col(dist, 1)),
                                          nn::add(cx, col(dist, 2)), nn::add(cy, col(dist, 3)), target));
    box_sum = box_sum.defined() ? nn::add(box_sum, term) : term;
  }
  if (!box_sum.defined()) box_sum = Var<T>(Tensor<T>::scalar(T(0)));
  loss.box = nn::mul_scalar(box_sum, norm);
  loss.cls = nn::mul_scalar(cls_sum, norm);
  loss.total = nn::add(nn::mul_scalar(loss.box, static_cast<T>(weights.box)),
                       nn::mul_scalar(loss.cls, static_cast<T>(weights.cls)));
  require_finite(loss);
  return loss;
}

template Var<float> ciou_loss<float>(const Var<float>&, const Var<float>&, const Var<float>&, const Var<float>&,
                                     const Tensor<float>&);
template Var<double> ciou_loss<double>(const Var<double>&, const Var<double>&, const Var<double>&,
                                       const Var<double>&, const Tensor<double>&);
template LossBreakdown<float> compute_loss<float>(const std::vector<nn::HeadOutput<float>>&, const AssignResult&,
                                                  const std::vector<int>&, const LossWeights&);
template LossBreakdown<double> compute_loss<double>(const std::vector<nn::HeadOutput<double>>&, const AssignResult&,
                                                    const std::vector<int>&, const LossWeights&);

}  // namespace litchi::detect
