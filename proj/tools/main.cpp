// SPDX-License-Identifier: Apache-2.0
//
// thz360: multi-AP terahertz 360-degree video streaming simulator and
// learning harness.

#include <iostream>

int main() {
    std::cout << "thz360 CLI placeholder\n";
    return 0;
}
