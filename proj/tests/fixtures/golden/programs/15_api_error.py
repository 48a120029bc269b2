object_set = scene()
table = list(filter(object_set=object_set, category="table"))[0]
others = relate(object_set=object_set, reference_object=table, relation="next to")
print(len(others))
