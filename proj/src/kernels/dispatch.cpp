#include "lgsum/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace lgsum::kernels {
namespace {

struct Dispatch {
    const KernelTable* table;
    Lane lane;
    Dispatch() {
        table = &scalar_table();
        lane = Lane::Scalar;
        const KernelTable* avx2 = avx2_table();
        if (avx2) {
            table = avx2;
            lane = Lane::Avx2;
        }
        if (const char* env = std::getenv("LGSUM_KERNELS")) {
            const std::string want(env);
            if (want == "scalar") {
                table = &scalar_table();
                lane = Lane::Scalar;
            } else if (want == "avx2" && avx2) {
                table = avx2;
                lane = Lane::Avx2;
            }
        }
    }
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

} // namespace

const KernelTable& active() { return *dispatch().table; }

Lane active_lane() { return dispatch().lane; }

bool avx2_supported() { return avx2_table() != nullptr; }

void set_lane(Lane lane) {
    if (lane == Lane::Scalar) {
        dispatch().table = &scalar_table();
        dispatch().lane = Lane::Scalar;
        return;
    }
    const KernelTable* avx2 = avx2_table();
    if (!avx2) throw std::runtime_error("avx2 kernel lane unavailable on this CPU");
    dispatch().table = avx2;
    dispatch().lane = Lane::Avx2;
}

std::string lane_name(Lane lane) { return lane == Lane::Scalar ? "scalar" : "avx2"; }

} // namespace lgsum::kernels
