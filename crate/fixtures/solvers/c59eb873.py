def solver_virtual(I):
  O = upscale(grid=I, factor=2)
  return dict(I=I,O=O)
