#pragma once

/// \file
/// Tensor-valued fields on a coordinate chart, evaluable as jets.
///
/// A field is any callable of the form
///
///     template <class T> void operator()(const std::array<T, 4>& x, TensorArray<T>& out) const;
///
/// instantiated for T = Jet<0> ... Jet<4>. `out` arrives zero-filled with the
/// field's dimension and rank. JetField erases the callable behind one virtual
/// entry point per jet order.

#include <array>
#include <memory>
#include <utility>
#include <vector>

#include "curvid/jet.hpp"
#include "curvid/tensor.hpp"

namespace curvid {

template <int K>
using JetPoint = std::array<Jet<K>, 4>;

template <int K>
JetPoint<K> seed_point(const Point& p)
{
    JetPoint<K> x;
    for (int i = 0; i < 4; ++i) x[i] = Jet<K>::variable(p[i], i);
    return x;
}

class JetField {
    struct Concept {
        virtual ~Concept() = default;
        virtual void eval(const JetPoint<0>& x, TensorArray<Jet<0>>& out) const = 0;
        virtual void eval(const JetPoint<1>& x, TensorArray<Jet<1>>& out) const = 0;
        virtual void eval(const JetPoint<2>& x, TensorArray<Jet<2>>& out) const = 0;
        virtual void eval(const JetPoint<3>& x, TensorArray<Jet<3>>& out) const = 0;
        virtual void eval(const JetPoint<4>& x, TensorArray<Jet<4>>& out) const = 0;
    };

    template <class F>
    struct Model final : Concept {
        explicit Model(F f) : fn(std::move(f)) {}
        void eval(const JetPoint<0>& x, TensorArray<Jet<0>>& out) const override { fn(x, out); }
        void eval(const JetPoint<1>& x, TensorArray<Jet<1>>& out) const override { fn(x, out); }
        void eval(const JetPoint<2>& x, TensorArray<Jet<2>>& out) const override { fn(x, out); }
        void eval(const JetPoint<3>& x, TensorArray<Jet<3>>& out) const override { fn(x, out); }
        void eval(const JetPoint<4>& x, TensorArray<Jet<4>>& out) const override { fn(x, out); }
        F fn;
    };

public:
    JetField() = default;

    template <class F>
    JetField(int dim, int rank, F f) : dim_(dim), rank_(rank), impl_(std::make_shared<Model<F>>(std::move(f)))
    {
    }

    int dim() const { return dim_; }
    int rank() const { return rank_; }
    bool empty() const { return !impl_; }

    template <int K>
    TensorArray<Jet<K>> evaluate(const JetPoint<K>& x) const
    {
        TensorArray<Jet<K>> out(dim_, rank_);
        impl_->eval(x, out);
        return out;
    }

    template <int K>
    TensorArray<Jet<K>> jet(const Point& p) const
    {
        return evaluate<K>(seed_point<K>(p));
    }

private:
    int dim_ = 0;
    int rank_ = 0;
    std::shared_ptr<const Concept> impl_;
};

enum class Variance { covariant, contravariant };

/// A tensor field with per-slot variance, e.g. h_{ij} or a vector field V^i.
class TensorFieldJet {
public:
    TensorFieldJet() = default;
    TensorFieldJet(JetField field, std::vector<Variance> slots) : field_(std::move(field)), slots_(std::move(slots)) {}

    template <class F>
    static TensorFieldJet covariant(int dim, int rank, F f)
    {
        return TensorFieldJet(JetField(dim, rank, std::move(f)), std::vector<Variance>(rank, Variance::covariant));
    }

    int dim() const { return field_.dim(); }
    int rank() const { return field_.rank(); }
    const std::vector<Variance>& slots() const { return slots_; }
    const JetField& field() const { return field_; }

    template <int K>
    TensorArray<Jet<K>> jet(const Point& p) const
    {
        return field_.jet<K>(p);
    }

private:
    JetField field_;
    std::vector<Variance> slots_;
};

}  // namespace curvid
