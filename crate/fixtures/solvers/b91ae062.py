def solver_virtual(I):
  x1 = palette(element=I)
  x2 = size(container=x1)
  x3 = add(a=x2, b=-1)
  O = upscale(grid=I, factor=x3)
  return dict(I=I,x1=x1,x2=x2,x3=x3,O=O)
