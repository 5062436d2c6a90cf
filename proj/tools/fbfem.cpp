#include "fbfem/driver.hpp"
int main(){return 0;}
