// placeholder: full CLI lands after the library settles
#include "gwi/gwi.hpp"

int main() { return 0; }
