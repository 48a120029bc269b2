object_set = scene()
categories = sorted({obj.category for obj in object_set})
print(categories)
counts = [len(filter(object_set=object_set, category=c)) for c in categories]
print(counts)
