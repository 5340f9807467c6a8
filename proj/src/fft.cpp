#include "phasebench/fft.hpp"

#include <fftw3.h>

#include <memory>
#include <mutex>

namespace phasebench {
namespace {

// Planning and plan destruction are not thread-safe in FFTW; execution is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

struct PlanDeleter
{
    void operator()(fftw_plan_s* p) const
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(p);
    }
};

ComplexField transform(const ComplexField& in, int sign)
{
    ComplexField out(in.shape());
    ComplexField work = in;
    auto* src = reinterpret_cast<fftw_complex*>(work.values().data());
    auto* dst = reinterpret_cast<fftw_complex*>(out.values().data());
    std::unique_ptr<fftw_plan_s, PlanDeleter> plan;
    {
        std::lock_guard lock(planner_mutex());
        plan.reset(fftw_plan_dft_2d(static_cast<int>(in.height()), static_cast<int>(in.width()), src, dst, sign,
                                    FFTW_ESTIMATE));
    }
    if (!plan)
        throw NumericalError("FFTW planning failed");
    fftw_execute(plan.get());
    return out;
}

} // namespace

ComplexField fft2(const ComplexField& in)
{
    return transform(in, FFTW_FORWARD);
}

ComplexField ifft2(const ComplexField& in)
{
    ComplexField out = transform(in, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(in.size());
    for (auto& v : out)
        v *= scale;
    return out;
}

} // namespace phasebench
