object_set = scene()
table_set = filter(object_set=object_set, category="table")
print(len(table_set))
for table in table_set:
    print(table.category)
