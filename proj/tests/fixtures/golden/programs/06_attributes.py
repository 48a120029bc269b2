object_set = scene()
desk = list(filter(object_set=object_set, category="desk"))[0]
lwh = query_attribute(object=desk, attribute_type="lwh")
print(lwh)
lamp = list(filter(object_set=object_set, category="lamp"))[0]
distance = query_attribute(object=lamp, attribute_type="distance")
print(distance)
color = query_attribute(object=desk, attribute_type="color", candidate_attribute_values=["brown", "black", "red"])
print(color)
shape = query_attribute(object=desk, attribute_type="shape", candidate_attribute_values=["round", "square", "rectangular"])
print(shape)
material = query_attribute(object=desk, attribute_type="material", candidate_attribute_values=["wood", "metal"])
print(material)
