//! Power-series coefficients, in `z = 2p - 1`, of the first three
//! Riemann-Siegel remainder terms `C0`, `C1`, `C2`. Generated offline at
//! 60-digit precision from `cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p)`.

pub(crate) const C0: [f64; 33] = [
    0.3826834323650898,
    0.0,
    0.43724046807752043,
    0.0,
    0.1323765754803435,
    0.0,
    -0.013605026047674188,
    0.0,
    -0.013567621970103581,
    0.0,
    -0.0016237253231444653,
    -8.12359292506749e-66,
    0.0002970535373337969,
    -2.3653641150054566e-66,
    7.94330087952147e-05,
    -1.471231707735505e-68,
    4.6556124614504504e-07,
    4.701728625602058e-68,
    -1.4327251630955106e-06,
    3.4610453592687387e-69,
    -1.0354847112312946e-07,
    -4.130562790533308e-70,
    1.2357927083861738e-08,
    -5.867978450946836e-71,
    1.7881083857954906e-09,
    1.0717293215115737e-72,
    -3.391414389927036e-11,
    4.8617614437245626e-73,
    -1.6326633902565907e-11,
    1.035122744428268e-74,
    -3.7851093185412205e-13,
    -2.267370993948816e-75,
    9.327423259201725e-14,
];

pub(crate) const C1: [f64; 30] = [
    0.0,
    -0.026825102628375348,
    0.0,
    0.013784773426351853,
    0.0,
    0.03849125048223508,
    0.0,
    0.009871066299062077,
    6.790509417419962e-65,
    -0.0033107597608584044,
    3.42715933384773e-65,
    -0.0014647808577954152,
    3.3912728404077095e-67,
    -1.3207940624876963e-05,
    -1.6197080123376124e-66,
    5.9227487018471416e-05,
    -1.6990310942763e-67,
    5.980242585373449e-06,
    2.7831148484547855e-68,
    -9.641322456169826e-07,
    5.264744874414524e-69,
    -1.8334733722714413e-07,
    -1.2487721590971506e-70,
    4.4670875627178334e-09,
    -7.204266576948484e-71,
    2.7096350821772744e-09,
    -1.916155072904146e-72,
    7.785288654315851e-11,
    5.1632427216003736e-73,
    -2.343762601089369e-11,
];

pub(crate) const C2: [f64; 27] = [
    0.005188542830293168,
    0.0,
    0.00030946583880634744,
    0.0,
    -0.011335941078229373,
    -9.632314323904048e-65,
    0.0022330457419581446,
    -1.0417315207090134e-64,
    0.00519663740886233,
    -7.548600628193189e-66,
    0.0003439914407620834,
    1.2597377154012017e-65,
    -0.0005910648427470583,
    2.3905047456232186e-66,
    -0.00010229972547935857,
    -4.9427112032544834e-67,
    2.0888392216992754e-05,
    -1.4453187652549913e-67,
    5.927665493096536e-06,
    3.7726943539885495e-69,
    -1.6423838362436276e-07,
    3.505494170610187e-69,
    -1.5161199700940684e-07,
    1.3026769814628745e-70,
    -5.907803698206668e-09,
    -4.068436628730623e-71,
    2.0911514859478188e-09,
];
